"""Command-line surface: synth, preprocess, train, eval, serve, run-online and report."""

from .main import build_parser, main

__all__ = ["build_parser", "main"]
