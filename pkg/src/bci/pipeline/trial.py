"""
One online trial: VI decode, MI decode, robot action, timing ledger.

A trial is a sequential state machine. Both task buffers are checked before
anything runs; a buffer shorter than the decode crop aborts the trial, which
then counts as a failure and carries the reason.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from core.errors import ErrorCode, PipelineError
from core.recording import ClassLabel, Recording, Task

from ..robotsim import ActionResult, Executor, RobotConfig, scenario_map
from .aggregation import aggregate_votes
from .config import STAGES, PipelineConfig, StageTiming, TimingMode
from .decoding import DecodeResult, TaskDecoder

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TaskBuffer:
    """A full task window handed over by the stream collector."""

    task: Task
    recording: Recording
    label: ClassLabel | None = None


@dataclass(frozen=True)
class TrialOutcome:
    trial_index: int
    decoded_vi: ClassLabel | None
    decoded_mi: ClassLabel | None
    true_vi: ClassLabel | None = None
    true_mi: ClassLabel | None = None
    vi_scores: np.ndarray | None = field(default=None, repr=False)
    mi_scores: np.ndarray | None = field(default=None, repr=False)
    grasp_ok: bool = False
    place_ok: bool = False
    action: str = ""
    timing: StageTiming = field(default_factory=StageTiming)
    abort_reason: str | None = None
    rng_draws: tuple[float, ...] = ()

    @property
    def aborted(self) -> bool:
        return self.abort_reason is not None

    @property
    def vi_correct(self) -> bool | None:
        """Decoded object matches the script; ``None`` when no truth is known."""
        if self.true_vi is None:
            return None
        return self.decoded_vi == self.true_vi

    @property
    def mi_correct(self) -> bool | None:
        if self.true_mi is None:
            return None
        return self.decoded_mi == self.true_mi

    @property
    def system_success(self) -> bool:
        """Both decodes right (where scripted) and the object grasped and placed."""
        if self.aborted:
            return False
        return self.vi_correct is not False and self.mi_correct is not False and self.grasp_ok and self.place_ok

    def log_line(self) -> str:
        def name(label: ClassLabel | None) -> str:
            return label.name if label is not None else "-"

        if self.aborted:
            return f"trial={self.trial_index} aborted reason={self.abort_reason!r}"
        return (
            f"trial={self.trial_index} vi={name(self.decoded_vi)}/{name(self.true_vi)} "
            f"mi={name(self.decoded_mi)}/{name(self.true_mi)} grasp={self.grasp_ok} place={self.place_ok} "
            f"success={self.system_success} total={self.timing.total:.3f}s"
        )

    def to_dict(self) -> dict[str, Any]:
        def label(value: ClassLabel | None) -> str | None:
            return value.name if value is not None else None

        return {
            "trial": self.trial_index,
            "decoded_vi": label(self.decoded_vi),
            "decoded_mi": label(self.decoded_mi),
            "true_vi": label(self.true_vi),
            "true_mi": label(self.true_mi),
            "vi_scores": self.vi_scores.tolist() if self.vi_scores is not None else None,
            "mi_scores": self.mi_scores.tolist() if self.mi_scores is not None else None,
            "grasp_ok": self.grasp_ok,
            "place_ok": self.place_ok,
            "system_success": self.system_success,
            "action": self.action,
            "timing": self.timing.to_dict(),
            "abort_reason": self.abort_reason,
            "rng_draws": list(self.rng_draws),
        }


def finish_trial(
    cfg: PipelineConfig,
    trial_index: int,
    vi: DecodeResult,
    mi: DecodeResult,
    executor: Executor,
    robot_config: RobotConfig,
    true_vi: ClassLabel | None = None,
    true_mi: ClassLabel | None = None,
    task_seconds: tuple[float, float] | None = None,
) -> TrialOutcome:
    """
    Aggregate both decodes, dispatch the robot action and fill the timing ledger.

    Args:
        cfg: Pipeline settings (aggregation, scenario, timing mode and budget)
        trial_index: Position of the trial in the session
        vi: Window votes of the VI decoder
        mi: Window votes of the MI decoder
        executor: Robot executor
        robot_config: Object specs for the action mapping
        true_vi: Scripted VI label, if known
        true_mi: Scripted MI label, if known
        task_seconds: Measured (VI, MI) task durations; budget values when absent
    """
    vi_index, vi_scores = aggregate_votes(vi.votes, cfg.aggregation)
    mi_index, mi_scores = aggregate_votes(mi.votes, cfg.aggregation)
    decoded_vi = ClassLabel(Task.VI, vi_index)
    decoded_mi = ClassLabel(Task.MI, mi_index)

    request = scenario_map(decoded_vi, decoded_mi, cfg.scenario, robot_config)
    result: ActionResult = executor.execute(request)

    if cfg.timing_mode is TimingMode.NOMINAL:
        timing = StageTiming(**{stage: cfg.budget(stage) for stage in STAGES})
    else:
        vi_task, mi_task = task_seconds or (cfg.budget("vi_task"), cfg.budget("mi_task"))
        timing = StageTiming(
            prepare=cfg.budget("prepare"),
            vi_task=vi_task,
            vi_data_proc=vi.data_proc_s,
            vi_infer=vi.infer_s,
            mi_task=mi_task,
            mi_data_proc=mi.data_proc_s,
            mi_infer=mi.infer_s,
            robot_exec=result.elapsed_seconds,
        )

    return TrialOutcome(
        trial_index=trial_index,
        decoded_vi=decoded_vi,
        decoded_mi=decoded_mi,
        true_vi=true_vi,
        true_mi=true_mi,
        vi_scores=vi_scores,
        mi_scores=mi_scores,
        grasp_ok=result.grasp_ok,
        place_ok=result.place_ok,
        action=request.describe(),
        timing=timing,
        rng_draws=result.rng_draws,
    )


def run_trial(
    cfg: PipelineConfig,
    vi_buffer: TaskBuffer,
    mi_buffer: TaskBuffer,
    vi_decoder: TaskDecoder,
    mi_decoder: TaskDecoder,
    executor: Executor,
    robot_config: RobotConfig | None = None,
    trial_index: int = 0,
) -> TrialOutcome:
    """
    Decode both task buffers and act on the result.

    Each buffer is the full 15 s task window; the decoders filter the whole
    buffer and decode only the configured crop (3-13 s by default, 20 windows).

    Returns:
        The trial outcome; an aborted outcome when a buffer is too short
    """
    robot_config = robot_config or RobotConfig()
    for buffer, decoder in ((vi_buffer, vi_decoder), (mi_buffer, mi_decoder)):
        if buffer.task is not decoder.task:
            raise PipelineError(
                code=ErrorCode.INVALID_INPUT,
                user_message=f"{buffer.task.value} buffer routed to a {decoder.task.value} decoder",
            )

    try:
        for buffer in (vi_buffer, mi_buffer):
            _, stop = cfg.crop_samples(buffer.recording.sample_rate_hz)
            if buffer.recording.n_samples < stop:
                raise PipelineError(
                    code=ErrorCode.TRIAL_ABORTED,
                    user_message=f"{buffer.task.value} buffer of {buffer.recording.n_samples} samples "
                    f"ends before the decode crop ({stop})",
                )
        vi = vi_decoder.decode(vi_buffer.recording, cfg.crop_samples(vi_buffer.recording.sample_rate_hz), vi_buffer.label)
        mi = mi_decoder.decode(mi_buffer.recording, cfg.crop_samples(mi_buffer.recording.sample_rate_hz), mi_buffer.label)
    except PipelineError as e:
        if e.code is not ErrorCode.TRIAL_ABORTED:
            raise
        logger.warning(f"Trial {trial_index} aborted: {e.user_message}")
        return TrialOutcome(
            trial_index=trial_index,
            decoded_vi=None,
            decoded_mi=None,
            true_vi=vi_buffer.label,
            true_mi=mi_buffer.label,
            abort_reason=e.user_message,
        )

    task_seconds = (vi_buffer.recording.duration_seconds, mi_buffer.recording.duration_seconds)
    return finish_trial(
        cfg, trial_index, vi, mi, executor, robot_config, vi_buffer.label, mi_buffer.label, task_seconds
    )
