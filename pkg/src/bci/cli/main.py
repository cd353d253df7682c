#!/usr/bin/env python3
"""
Command-line entry point for the imagery BCI system.

Usage examples:
    imagery-bci synth --task mi --trials 100 --seed 7
    imagery-bci train out/mi_seed7.eegr
    imagery-bci run-online --oracle --trials 50
    imagery-bci run-online --simulate 5000
    imagery-bci report out/session_report.json

Exit codes: 0 success, 2 config or validation error, 3 I/O error, 4 stream
protocol error, 5 numerical failure, 6 pipeline error, 1 anything else.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable

from core.config import DATA_DIR_ENV
from core.config_manager import RunConfigManager
from core.error_handler import init_logging, setup_error_handling

from . import commands

logger = logging.getLogger(__name__)

Command = Callable[[argparse.Namespace, RunConfigManager], int]

COMMANDS: dict[str, Command] = {
    "synth": commands.cmd_synth,
    "preprocess": commands.cmd_preprocess,
    "train": commands.cmd_train,
    "eval": commands.cmd_eval,
    "serve": commands.cmd_serve,
    "run-online": commands.cmd_run_online,
    "report": commands.cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imagery-bci",
        description="Synthesize, preprocess, train and run the VI/MI robot-control pipeline.",
        epilog=f"The default data directory comes from ${DATA_DIR_ENV}.",
    )
    parser.add_argument("--config", help="JSON run configuration file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a config value by dotted path (repeatable), e.g. synth.separability=0.8",
    )
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Log level (default: config)")
    parser.add_argument("--log-file", help="Also write logs to this rotating file")
    parser.add_argument("--data-dir", help="Data directory (default: config or environment)")

    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="Write a seeded synthetic session container")
    synth.add_argument("--task", type=str.upper, choices=["VI", "MI"], help="Imagery task")
    synth.add_argument("--trials", type=int, help="Number of trials")
    synth.add_argument("--seed", type=int, help="Session seed (seeds.synth)")
    synth.add_argument("--separability", type=float, help="Class separability in [0, 1]")
    synth.add_argument("--evoked", action="store_true", help="Add the evoked component to VI trials")
    synth.add_argument("--online", action="store_true", help="Write an online run script instead of an offline session")
    synth.add_argument("-o", "--output", help="Output container path")

    preprocess = sub.add_parser("preprocess", help="Write cleaned containers and ICA models for every profile")
    preprocess.add_argument("recording", help="Raw session container")
    preprocess.add_argument("--output-dir", help="Output directory (default: paths.output_dir)")

    train = sub.add_parser("train", help="Train the model x profile grid and save every model")
    train.add_argument("recording", help="Raw session container")
    train.add_argument("--kinds", nargs="+", help="Decoder kinds (default: train.kinds)")
    train.add_argument("--profiles", nargs="+", type=str.upper, help="Frequency profiles (default: train.profiles)")
    train.add_argument("--phase", choices=["Imagery", "Perception"], help="Epoch phase (default: train.phase)")
    train.add_argument("--epochs", type=int, help="Training epochs of the gradient-trained kinds")
    train.add_argument("--output-dir", help="Output directory (default: paths.output_dir)")

    evaluate = sub.add_parser("eval", help="Evaluate a saved model on a recording")
    evaluate.add_argument("model", help="Model file")
    evaluate.add_argument("recording", help="Raw session container")
    evaluate.add_argument("-o", "--output", help="Write the evaluation as JSON")

    serve = sub.add_parser("serve", help="Replay a recording over TCP to one client")
    serve.add_argument("recording", help="Container to replay")
    serve.add_argument("--port", type=int, help="TCP port (default: stream.port)")
    serve.add_argument("--clock", choices=["Realtime", "Accelerated", "Unpaced"], help="Pacing (default: stream.clock_mode)")

    online = sub.add_parser("run-online", help="Run the online pipeline and write the session report")
    source = online.add_mutually_exclusive_group()
    source.add_argument("--replay", help="Replay this container through a loopback stream")
    source.add_argument("--connect", action="store_true", help="Read from a live server at stream.host:stream.port")
    source.add_argument("--simulate", type=int, metavar="N", help="Signal-free Monte-Carlo of N trials")
    online.add_argument("--oracle", action="store_true", help="Decode with always-correct simulated decoders")
    online.add_argument("--vi-model", help="VI model file (default: pipeline.vi_model)")
    online.add_argument("--mi-model", help="MI model file (default: pipeline.mi_model)")
    online.add_argument("--trials", type=int, help="Number of trials (default: pipeline.n_trials)")
    online.add_argument("--scenario", choices=["BaseDemo", "HiddenObject", "DirectHandover"], help="Demonstration scenario")
    online.add_argument("--timing", choices=["Nominal", "Measured"], help="Timing ledger mode")
    online.add_argument(
        "--profile", type=str.upper, choices=["F40", "F60", "F100"], help="Frequency profile of both models (default: pipeline.profile)"
    )
    online.add_argument("--robot-bridge", action="store_true", help="Drive the simulated robot over its socket bridge")
    online.add_argument("--output-dir", help="Output directory (default: paths.output_dir)")

    report = sub.add_parser("report", help="Render a saved session report as text")
    report.add_argument("report", help="Session report JSON")
    report.add_argument("-o", "--output", help="Also write the text here")

    return parser


# Subcommand flag -> dotted config path
_FLAG_PATHS: dict[str, str] = {
    "data_dir": "paths.data_dir",
    "log_level": "logging.level",
    "log_file": "logging.file",
    "task": "synth.task",
    "seed": "seeds.synth",
    "separability": "synth.separability",
    "kinds": "train.kinds",
    "profiles": "train.profiles",
    "phase": "train.phase",
    "epochs": "train.epochs",
    "port": "stream.port",
    "clock": "stream.clock_mode",
    "vi_model": "pipeline.vi_model",
    "mi_model": "pipeline.mi_model",
    "scenario": "pipeline.scenario",
    "timing": "pipeline.timing_mode",
    "profile": "pipeline.profile",
}


def load_config(args: argparse.Namespace) -> RunConfigManager:
    """
    Load the config file, apply ``--set`` overrides, then the explicit flags.

    Raises:
        ConfigError: If any value ends up outside the schema
    """
    config = RunConfigManager.from_file(args.config, args.overrides)
    for flag, path in _FLAG_PATHS.items():
        value = getattr(args, flag, None)
        if value is not None:
            config.set(path, value)
    if args.command == "synth":
        if args.trials is not None and not args.online:
            config.set("synth.n_trials", args.trials)
        if args.evoked:
            config.set("synth.evoked_component", True)
    return config


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    init_logging(args.log_level or "INFO", args.log_file)
    handler = setup_error_handling()

    try:
        config = load_config(args)
        init_logging(config.get("logging.level"), config.get("logging.file") or None)
        logger.debug(f"Running {args.command} with {config.export_config()}")
        return COMMANDS[args.command](args, config)
    except KeyboardInterrupt:
        logger.warning("Interrupted")
        return 130
    except Exception as e:
        app_error = handler.handle(e, {"command": args.command})
        print(f"error: {handler.to_user_message(app_error)}", file=sys.stderr)
        return handler.exit_code_for(app_error)
    finally:
        handler.restore_hooks()


if __name__ == "__main__":
    sys.exit(main())
