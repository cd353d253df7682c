"""
Online sessions: trial loop over streamed task windows, session report, and a
signal-free Monte-Carlo of the same trial state machine.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from core.errors import BaseAppError
from core.recording import ClassLabel, Task, ViClass

from ..robotsim import Executor, RobotConfig, SimulatedExecutor
from ..stream import TaskWindow
from .config import PipelineConfig, StageTiming
from .decoding import SimulatedDecoder, TaskDecoder
from .trial import TaskBuffer, TrialOutcome, finish_trial, run_trial

logger = logging.getLogger(__name__)

# System accuracy reported for the physical system, kept for comparison only
PUBLISHED_SYSTEM_ACCURACY = 0.2088


def _rate(hits: int, total: int) -> float | None:
    return hits / total if total else None


@dataclass(frozen=True)
class SessionReport:
    """
    Session summary. Rates are ``None`` when their denominator is empty.

    ``product_estimate`` multiplies the four component rates (VI accuracy,
    grasp rate, MI accuracy, place rate); ``system_accuracy`` is the observed
    share of fully successful trials.
    """

    n_trials: int = 0
    n_aborted: int = 0
    vi_accuracy: float | None = None
    mi_accuracy: float | None = None
    grasp_rate: float | None = None
    place_rate: float | None = None
    system_accuracy: float | None = None
    product_estimate: float | None = None
    mean_timing: StageTiming = field(default_factory=StageTiming)
    partial: bool = False
    error: str | None = None
    scenario: str = ""
    aggregation: str = ""
    trials: list[dict[str, Any]] = field(default_factory=list, repr=False)

    @classmethod
    def from_outcomes(
        cls, outcomes: list[TrialOutcome], cfg: PipelineConfig, partial: bool = False, error: str | None = None
    ) -> SessionReport:
        completed = [o for o in outcomes if not o.aborted]
        vi_scripted = [o for o in outcomes if o.true_vi is not None]
        mi_scripted = [o for o in outcomes if o.true_mi is not None]
        grasped = [o for o in completed if o.grasp_ok]
        vi_acc = _rate(sum(o.vi_correct is True for o in vi_scripted), len(vi_scripted))
        mi_acc = _rate(sum(o.mi_correct is True for o in mi_scripted), len(mi_scripted))
        grasp = _rate(len(grasped), len(completed))
        place = _rate(sum(o.place_ok for o in grasped), len(grasped))
        components = (vi_acc, grasp, mi_acc, place)
        product = None if any(c is None for c in components) else float(np.prod(components))
        return cls(
            n_trials=len(outcomes),
            n_aborted=len(outcomes) - len(completed),
            vi_accuracy=vi_acc,
            mi_accuracy=mi_acc,
            grasp_rate=grasp,
            place_rate=place,
            system_accuracy=_rate(sum(o.system_success for o in outcomes), len(outcomes)),
            product_estimate=product,
            mean_timing=StageTiming.mean([o.timing for o in completed]),
            partial=partial,
            error=error,
            scenario=cfg.scenario.value,
            aggregation=cfg.aggregation.value,
            trials=[o.to_dict() for o in outcomes],
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_trials": self.n_trials,
            "n_aborted": self.n_aborted,
            "vi_accuracy": self.vi_accuracy,
            "mi_accuracy": self.mi_accuracy,
            "grasp_rate": self.grasp_rate,
            "place_rate": self.place_rate,
            "system_accuracy": self.system_accuracy,
            "product_estimate": self.product_estimate,
            "mean_timing": self.mean_timing.to_dict(),
            "partial": self.partial,
            "error": self.error,
            "scenario": self.scenario,
            "aggregation": self.aggregation,
            "trials": self.trials,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SessionReport:
        def opt(key: str) -> float | None:
            value = data.get(key)
            return None if value is None else float(value)

        return cls(
            n_trials=int(data.get("n_trials", 0)),
            n_aborted=int(data.get("n_aborted", 0)),
            vi_accuracy=opt("vi_accuracy"),
            mi_accuracy=opt("mi_accuracy"),
            grasp_rate=opt("grasp_rate"),
            place_rate=opt("place_rate"),
            system_accuracy=opt("system_accuracy"),
            product_estimate=opt("product_estimate"),
            mean_timing=StageTiming.from_dict(data.get("mean_timing", {})),
            partial=bool(data.get("partial", False)),
            error=data.get("error"),
            scenario=str(data.get("scenario", "")),
            aggregation=str(data.get("aggregation", "")),
            trials=list(data.get("trials", [])),
        )


def run_session(
    cfg: PipelineConfig,
    windows: Iterable[TaskWindow],
    vi_decoder: TaskDecoder,
    mi_decoder: TaskDecoder,
    executor: Executor,
    robot_config: RobotConfig | None = None,
    n_trials: int | None = None,
) -> SessionReport:
    """
    Run online trials over a stream of task windows.

    Windows are paired in order, a VI window followed by an MI window. Labels on
    the task-start triggers serve as the scripted truth.

    Args:
        cfg: Pipeline settings
        windows: Task windows in trigger order, typically ``StreamCollector.windows()``
        vi_decoder: Decoder for the VI task
        mi_decoder: Decoder for the MI task
        executor: Robot executor
        robot_config: Object specs for the action mapping
        n_trials: Stop after this many trials; all available when ``None``

    Returns:
        Report over the completed trials; flagged partial if the stream failed
    """
    robot_config = robot_config or RobotConfig()
    limit = cfg.n_trials if n_trials is None else n_trials
    outcomes: list[TrialOutcome] = []
    pending_vi: TaskWindow | None = None
    error: str | None = None

    if limit <= 0:
        return SessionReport.from_outcomes(outcomes, cfg)

    try:
        for window in windows:
            if window.task is Task.VI:
                if pending_vi is not None:
                    logger.warning(f"VI window at sample {pending_vi.start_sample} had no MI window; dropped")
                pending_vi = window
                continue
            if pending_vi is None:
                logger.warning(f"MI window at sample {window.start_sample} without a preceding VI window; dropped")
                continue
            outcome = run_trial(
                cfg,
                TaskBuffer(Task.VI, pending_vi.recording(), pending_vi.label),
                TaskBuffer(Task.MI, window.recording(), window.label),
                vi_decoder,
                mi_decoder,
                executor,
                robot_config,
                trial_index=len(outcomes),
            )
            pending_vi = None
            outcomes.append(outcome)
            logger.info(outcome.log_line())
            if len(outcomes) >= limit:
                break
    except BaseAppError as e:
        error = e.user_message
        logger.error(f"Session ended early after {len(outcomes)} trials: {error}")

    report = SessionReport.from_outcomes(outcomes, cfg, partial=error is not None, error=error)
    logger.info(f"Session finished: {report.n_trials} trials, system accuracy {report.system_accuracy}")
    return report


def simulate_system(
    vi_accuracy: float,
    mi_accuracy: float,
    executor: SimulatedExecutor,
    n_trials: int,
    seed: int = 0,
    cfg: PipelineConfig | None = None,
) -> SessionReport:
    """
    Monte-Carlo of the trial state machine without signals.

    The true object comes from the executor's object mix, the true side is
    uniform, and both decoders are Bernoulli-correct with the given accuracies.
    """
    cfg = cfg or PipelineConfig()
    rng = np.random.default_rng(seed)
    vi_decoder = SimulatedDecoder(Task.VI, vi_accuracy, seed + 1)
    mi_decoder = SimulatedDecoder(Task.MI, mi_accuracy, seed + 2)
    outcomes: list[TrialOutcome] = []
    for trial in range(n_trials):
        true_vi = ClassLabel.vi(ViClass[executor.draw_object().name.upper()])
        true_mi = ClassLabel.mi(int(rng.integers(Task.MI.n_classes)))
        vi = vi_decoder.decode(None, (0, 0), true_vi)
        mi = mi_decoder.decode(None, (0, 0), true_mi)
        outcome = finish_trial(cfg, trial, vi, mi, executor, executor.config, true_vi, true_mi)
        outcomes.append(outcome)
        logger.debug(outcome.log_line())
    report = SessionReport.from_outcomes(outcomes, cfg)
    logger.info(
        f"Simulated {n_trials} trials: system accuracy {report.system_accuracy}, product estimate {report.product_estimate}"
    )
    return report
