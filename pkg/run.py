"""
Development runner for the imagery-bci command line.
Runs the CLI without installation, e.g. ``python run.py synth --task mi``.
"""

import os
import sys

sys.path.insert(0, os.path.abspath("src"))

from bci.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
