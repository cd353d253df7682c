"""
Subcommand implementations.

Each command receives the parsed arguments and the validated run
configuration, writes its outputs plus an ``effective_config.json`` snapshot,
and returns the process exit code. Errors propagate as ``BaseAppError`` and are
turned into exit codes by ``main``.
"""

from __future__ import annotations

import argparse
import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from core.config import ensure_output_dir
from core.config_manager import RunConfigManager
from core.container import atomic_write_bytes, read_recording, write_recording
from core.epochs import slice_epochs
from core.errors import ConfigError, ErrorCode, PipelineError, ValidationError
from core.recording import ClassLabel, Phase, Recording, Task, ViClass

from ..decoders import (
    DecoderKind,
    DecoderModel,
    TrainConfig,
    build_dataset,
    evaluate,
    load_model,
    rank_configurations,
    render_accuracy_table,
    save_model,
    train_grid,
)
from ..features import bands_for_profile, check_band_set, write_epoch_features
from ..pipeline import (
    ModelDecoder,
    PipelineConfig,
    SessionReport,
    SimulatedDecoder,
    TaskDecoder,
    read_session_report,
    render_session_report,
    run_session,
    simulate_system,
    write_session_report,
)
from ..preprocess import FrequencyProfile, PreprocessChain, load_ica, save_ica
from ..robotsim import OBJECT_NAMES, Executor, RemoteExecutor, RobotBridgeServer, RobotConfig, SimulatedExecutor
from ..stream import LoopbackTransport, StreamCollector, StreamSettings, accept, connect, open_server, serve_replay, start_replay
from ..synthgen import SynthConfig, generate_online_stream_script, generate_session

logger = logging.getLogger(__name__)

REPORT_NAME = "session_report"


def _output_dir(config: RunConfigManager, override: str | None = None) -> Path:
    """Explicit directories are used as given; the configured one lives under the data directory."""
    if override:
        return ensure_output_dir(Path(override))
    path = Path(config.get("paths.output_dir"))
    return ensure_output_dir(path if path.is_absolute() else Path(config.get("paths.data_dir")) / path)


def resolve_input(path: str, config: RunConfigManager) -> Path:
    """Input paths that do not exist as given are looked up in the data directory."""
    candidate = Path(path)
    if candidate.exists() or candidate.is_absolute():
        return candidate
    in_data = Path(config.get("paths.data_dir")) / candidate
    return in_data if in_data.exists() else candidate


def _write_text(path: Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def _write_json(path: Path, data: Any) -> None:
    _write_text(path, json.dumps(data, indent=2, sort_keys=True) + "\n")


def _synth_config(config: RunConfigManager) -> SynthConfig:
    return SynthConfig.from_dict(config.section("synth"), seed=config.get("seeds.synth"), n_scalp=config.get("montage.n_scalp"))


def online_truth(config: RunConfigManager, n_trials: int) -> list[tuple[ClassLabel, ClassLabel]]:
    """Scripted (object, side) pairs: objects from ``robot.object_mix``, sides uniform."""
    rng = np.random.default_rng(config.get("seeds.synth"))
    weights = RobotConfig.from_dict(config.section("robot")).mix_weights()
    p = [weights[name] for name in OBJECT_NAMES]
    truth = []
    for _ in range(n_trials):
        name = OBJECT_NAMES[int(rng.choice(len(OBJECT_NAMES), p=p))]
        truth.append((ClassLabel.vi(ViClass[name.upper()]), ClassLabel.mi(int(rng.integers(Task.MI.n_classes)))))
    return truth


def cmd_synth(args: argparse.Namespace, config: RunConfigManager) -> int:
    """Write one seeded session container, or an online run script with ``--online``."""
    cfg = _synth_config(config)
    if args.online:
        n_trials = config.get("pipeline.n_trials") if args.trials is None else args.trials
        rec = generate_online_stream_script(cfg, online_truth(config, n_trials))
        default_name = f"online_seed{cfg.seed}.eegr"
        summary = f"{n_trials} online trials"
    else:
        rec = generate_session(cfg)
        default_name = f"{cfg.task.value.lower()}_seed{cfg.seed}.eegr"
        summary = f"{cfg.n_trials} {cfg.task.value} trials"

    path = Path(args.output) if args.output else _output_dir(config) / default_name
    ensure_output_dir(path.parent)
    write_recording(rec, path)
    config.write_snapshot(path.parent)
    print(f"Wrote {path}: {summary}, {rec.n_channels} channels, {rec.duration_seconds:.1f} s")
    return 0


def fit_profiles(rec: Recording, config: RunConfigManager, profiles: list[FrequencyProfile]) -> dict[FrequencyProfile, tuple[Recording, PreprocessChain]]:
    """Run the offline chain (ICA fitted on the session) once per frequency profile."""
    section = config.section("preprocess")
    fitted: dict[FrequencyProfile, tuple[Recording, PreprocessChain]] = {}
    for profile in profiles:
        chain = PreprocessChain.from_dict(section, profile)
        chain.ica_seed = int(config.get("seeds.train"))
        fitted[profile] = (chain.fit(rec), chain)
        logger.info(f"Preprocessed {profile.value}: ICA rejected {chain.ica_model.rejected if chain.ica_model else []}")
    return fitted


def cmd_preprocess(args: argparse.Namespace, config: RunConfigManager) -> int:
    """Write a cleaned container and the fitted ICA model for every profile."""
    rec = read_recording(resolve_input(args.recording, config))
    out = _output_dir(config, args.output_dir)
    stem = Path(args.recording).stem
    provenance: dict[str, Any] = {}
    for profile, (clean, chain) in fit_profiles(rec, config, list(FrequencyProfile)).items():
        write_recording(clean, out / f"{stem}_{profile.value}.eegr")
        if chain.ica_model is not None:
            save_ica(chain.ica_model, out / f"{stem}_{profile.value}_ica.npz")
        provenance[profile.value] = chain.provenance()
    _write_json(out / f"{stem}_preprocess.json", provenance)
    config.write_snapshot(out)
    print(f"Preprocessed {args.recording} under {len(provenance)} profiles into {out}")
    return 0


def ica_path(model_dir: Path, task: Task, profile: FrequencyProfile) -> Path:
    """ICA model saved next to the decoders trained on the same preprocessing."""
    return model_dir / f"{task.value.lower()}_{profile.value}_ica.npz"


def model_path(model_dir: Path, task: Task, kind: DecoderKind, profile: FrequencyProfile) -> Path:
    return model_dir / f"{task.value.lower()}_{kind.value}_{profile.value}.eegm"


def cmd_train(args: argparse.Namespace, config: RunConfigManager) -> int:
    """Train the (kind x profile) grid, write both accuracy tables and save every model."""
    section = config.section("train")
    kinds = [DecoderKind(k) for k in section["kinds"]]
    profiles = [FrequencyProfile(p) for p in section["profiles"]]
    phase = Phase(section["phase"])

    rec = read_recording(resolve_input(args.recording, config))
    fitted = fit_profiles(rec, config, profiles)
    epochs_by_profile = {profile: slice_epochs(clean, phase) for profile, (clean, _) in fitted.items()}
    if not any(epochs_by_profile.values()):
        raise ValidationError(code=ErrorCode.EMPTY_INPUT, user_message=f"{args.recording} holds no {phase.value} epochs")
    task = next(iter(epochs_by_profile.values()))[0].label.task

    results = train_grid(
        epochs_by_profile,
        kinds,
        TrainConfig.from_dict(section, seed=config.get("seeds.train")),
        test_fraction=section["test_fraction"],
        split_seed=config.get("seeds.split"),
    )

    out = _output_dir(config, args.output_dir)
    model_dir = ensure_output_dir(out / "models")
    for profile, (_, chain) in fitted.items():
        if chain.ica_model is not None:
            save_ica(chain.ica_model, ica_path(model_dir, task, profile))
        if epochs_by_profile[profile]:
            write_epoch_features(out / f"{task.value.lower()}_{profile.value}_features.eegf", epochs_by_profile[profile], profile)
    for (kind, profile), cell in results.items():
        save_model(cell.model, model_path(model_dir, task, kind, profile))

    tables = render_accuracy_table(results, "window") + "\n" + render_accuracy_table(results, "trial")
    _write_text(out / f"{task.value.lower()}_accuracy.txt", tables)
    _write_json(
        out / f"{task.value.lower()}_grid.json",
        {
            "task": task.value,
            "phase": phase.value,
            "cells": [
                {"kind": kind.value, "profile": profile.value, **cell.result.to_dict()}
                for (kind, profile), cell in results.items()
            ],
            "top": [{"kind": c.kind.value, "profile": c.profile.value} for c in rank_configurations(results)],
        },
    )
    config.write_snapshot(out)
    print(tables, end="")
    print(f"Saved {len(results)} models to {model_dir}")
    return 0


def cmd_eval(args: argparse.Namespace, config: RunConfigManager) -> int:
    """Re-evaluate a saved model on every epoch of a recording."""
    model = load_model(resolve_input(args.model, config))
    phase = Phase(config.get("train.phase"))
    clean, _ = fit_profiles(read_recording(resolve_input(args.recording, config)), config, [model.profile])[model.profile]
    epochs = slice_epochs(clean, phase)
    if not epochs:
        raise ValidationError(code=ErrorCode.EMPTY_INPUT, user_message=f"{args.recording} holds no {phase.value} epochs")
    result = evaluate(model, build_dataset(epochs, model.profile, model.feature_spec.representation))
    payload = {"model": str(args.model), "recording": str(args.recording), "phase": phase.value, **result.to_dict()}
    if args.output:
        path = Path(args.output)
        ensure_output_dir(path.parent)
        _write_json(path, payload)
        config.write_snapshot(path.parent)
    print(
        f"{model.kind.value}/{model.profile.value} on {len(epochs)} {model.task.value} trials: "
        f"window {100 * result.window.accuracy:.2f}%, trial {100 * result.trial.accuracy:.2f}% "
        f"(chance {100 * result.trial.chance_level:.1f}%)"
    )
    return 0


def cmd_serve(args: argparse.Namespace, config: RunConfigManager) -> int:
    """Replay a recording to the first client that connects."""
    rec = read_recording(resolve_input(args.recording, config))
    settings = StreamSettings.from_dict(config.section("stream"))
    listener = open_server(settings.host, settings.port)
    try:
        print(f"Serving {args.recording} on {settings.host}:{listener.getsockname()[1]} ({settings.clock_mode.value})")
        with accept(listener) as transport:
            stats = serve_replay(rec, transport, settings)
    finally:
        listener.close()
    print(f"Sent {stats.n_chunks} chunks and {stats.n_triggers} triggers, max drift {1000 * stats.max_drift_s:.1f} ms")
    return 0


def _model_decoder(path: str, task: Task, profile: FrequencyProfile, config: RunConfigManager) -> ModelDecoder:
    """
    Load a trained model for online decoding under the session profile.

    Raises:
        PipelineError: If the model is for the other task or its gamma band does not match ``profile``
    """
    if not path:
        raise ConfigError(
            code=ErrorCode.CONFIG_MISSING,
            user_message=f"pipeline.{task.value.lower()}_model is not set; train models or use --oracle",
            path=f"pipeline.{task.value.lower()}_model",
        )
    resolved = resolve_input(path, config)
    model: DecoderModel = load_model(resolved)
    if model.task is not task:
        raise PipelineError(
            code=ErrorCode.INVALID_INPUT, user_message=f"{path} is a {model.task.value} model, expected {task.value}"
        )
    check_band_set(bands_for_profile(model.profile), profile)
    chain = PreprocessChain.from_dict(config.section("preprocess"), profile)
    ica_file = ica_path(resolved.parent, task, profile)
    if chain.use_ica and ica_file.exists():
        chain.ica_model = load_ica(ica_file)
    return ModelDecoder(model, chain)


def _decoders(args: argparse.Namespace, cfg: PipelineConfig, config: RunConfigManager) -> tuple[TaskDecoder, TaskDecoder]:
    if args.oracle:
        seed = config.get("seeds.decoder_sim")
        return SimulatedDecoder(Task.VI, 1.0, seed), SimulatedDecoder(Task.MI, 1.0, seed + 1)
    return (
        _model_decoder(cfg.vi_model, Task.VI, cfg.profile, config),
        _model_decoder(cfg.mi_model, Task.MI, cfg.profile, config),
    )


def _save_report(report: SessionReport, out: Path, config: RunConfigManager) -> str:
    text = render_session_report(report)
    write_session_report(report, out / f"{REPORT_NAME}.json")
    _write_text(out / f"{REPORT_NAME}.txt", text)
    config.write_snapshot(out)
    return text


def cmd_run_online(args: argparse.Namespace, config: RunConfigManager) -> int:
    """
    Run the online pipeline end to end and write the session report.

    The stream source is a live server (``--connect``), a replayed container
    (``--replay``) or, by default, an online script synthesized from the config.
    ``--simulate N`` skips signals and runs the trial state machine only.
    """
    cfg = PipelineConfig.from_dict(config.section("pipeline"))
    robot_config = RobotConfig.from_dict(config.section("robot"))
    out = _output_dir(config, args.output_dir)
    n_trials = cfg.n_trials if args.trials is None else args.trials

    if args.simulate is not None:
        executor = SimulatedExecutor(robot_config, config.get("seeds.robot"))
        report = simulate_system(
            cfg.simulated_vi_accuracy, cfg.simulated_mi_accuracy, executor, args.simulate, config.get("seeds.decoder_sim"), cfg
        )
        print(_save_report(report, out, config), end="")
        return 0

    vi_decoder, mi_decoder = _decoders(args, cfg, config)
    settings = StreamSettings.from_dict(config.section("stream"))

    bridge: RobotBridgeServer | None = None
    executor_impl: Executor
    if args.robot_bridge:
        bridge = RobotBridgeServer(SimulatedExecutor(robot_config, config.get("seeds.robot")), robot_config).start()
        executor_impl = RemoteExecutor("127.0.0.1", bridge.port)
    else:
        executor_impl = SimulatedExecutor(robot_config, config.get("seeds.robot"))

    replay_worker = None
    if args.connect:
        transport = connect(settings.host, settings.port)
    else:
        rec = read_recording(resolve_input(args.replay, config)) if args.replay else generate_online_stream_script(
            _synth_config(config), online_truth(config, n_trials)
        )
        server_end, transport = LoopbackTransport.pair()
        replay_worker = start_replay(rec, server_end, settings)

    collector = StreamCollector(transport, settings).start()
    try:
        report = run_session(cfg, collector.windows(), vi_decoder, mi_decoder, executor_impl, robot_config, n_trials)
    finally:
        collector.stop()
        if replay_worker is not None:
            replay_worker.cancel()
            replay_worker.join(2.0)
        transport.close()
        if isinstance(executor_impl, RemoteExecutor):
            executor_impl.close()
        if bridge is not None:
            bridge.stop()

    logger.info(f"Collector stats: {collector.stats}")
    print(_save_report(report, out, config), end="")
    return 0


def cmd_report(args: argparse.Namespace, config: RunConfigManager) -> int:
    """Re-render a saved session report."""
    text = render_session_report(read_session_report(resolve_input(args.report, config)))
    if args.output:
        _write_text(Path(args.output), text)
    print(text, end="")
    return 0
