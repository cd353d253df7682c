"""Synthetic session settings and paradigm timing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from core.errors import ErrorCode, ValidationError
from core.recording import DEFAULT_SAMPLE_RATE_HZ, Task


@dataclass(frozen=True)
class ParadigmTiming:
    """Phase durations of one offline trial, in seconds."""

    fixation_s: float
    stimulus_s: float
    imagery_s: float
    post_s: float

    @property
    def trial_s(self) -> float:
        return self.fixation_s + self.stimulus_s + self.imagery_s + self.post_s

    def samples(self, fs: float) -> tuple[int, int, int, int]:
        """Phase lengths in samples, each rounded independently."""
        return (
            round(self.fixation_s * fs),
            round(self.stimulus_s * fs),
            round(self.imagery_s * fs),
            round(self.post_s * fs),
        )


# Fixation cross, picture, imagery of the picture, short rest
VI_TIMING = ParadigmTiming(fixation_s=1.0, stimulus_s=2.0, imagery_s=5.0, post_s=1.0)
# Fixation cross, arrow cue, kinesthetic imagery, pause plus inter-trial interval
MI_TIMING = ParadigmTiming(fixation_s=1.0, stimulus_s=1.25, imagery_s=4.0, post_s=3.0)


@dataclass(frozen=True)
class OnlineTiming:
    """Layout of one online trial: beep, VI task window, gap, MI task window, rest."""

    lead_s: float = 1.0
    task_s: float = 15.0
    gap_s: float = 1.0
    rest_s: float = 2.0


def timing_for(task: Task) -> ParadigmTiming:
    return VI_TIMING if task is Task.VI else MI_TIMING


@dataclass(frozen=True)
class SynthConfig:
    """
    Settings of one synthetic session.

    ``seed`` drives every per-session random draw. ``signature_seed`` fixes the
    class signatures, so sessions generated with different seeds but the same
    signature seed share their class structure (train offline, decode online).
    """

    task: Task = Task.MI
    n_trials: int = 100
    separability: float = 0.5
    alpha: float = 1.0
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ
    evoked_component: bool = False
    seed: int = 0
    signature_seed: int = 0
    n_scalp: int = 59

    def __post_init__(self) -> None:
        if self.n_trials < 1:
            raise ValidationError(code=ErrorCode.VALUE_OUT_OF_RANGE, user_message="n_trials must be at least 1", field="n_trials")
        if not 0.0 <= self.separability <= 1.0:
            raise ValidationError(
                code=ErrorCode.VALUE_OUT_OF_RANGE,
                user_message=f"separability must lie in [0, 1], got {self.separability}",
                field="separability",
            )
        if not 0.0 <= self.alpha <= 3.0:
            raise ValidationError(code=ErrorCode.VALUE_OUT_OF_RANGE, user_message="alpha must lie in [0, 3]", field="alpha")
        if self.sample_rate_hz <= 200.0:
            raise ValidationError(
                code=ErrorCode.VALUE_OUT_OF_RANGE,
                user_message="Sample rate must exceed 200 Hz to carry the 50 Hz line and gamma bands",
                field="sample_rate_hz",
            )

    @property
    def timing(self) -> ParadigmTiming:
        return timing_for(self.task)

    @classmethod
    def from_dict(cls, data: dict[str, Any], seed: int = 0, n_scalp: int = 59) -> SynthConfig:
        """Build from the ``synth`` config section; the seed lives in ``seeds.synth``."""
        return cls(
            task=Task(data.get("task", "MI")),
            n_trials=int(data.get("n_trials", 100)),
            separability=float(data.get("separability", 0.5)),
            alpha=float(data.get("alpha", 1.0)),
            sample_rate_hz=float(data.get("sample_rate_hz", DEFAULT_SAMPLE_RATE_HZ)),
            evoked_component=bool(data.get("evoked_component", False)),
            seed=seed,
            signature_seed=int(data.get("signature_seed", 0)),
            n_scalp=n_scalp,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "task": self.task.value,
            "n_trials": self.n_trials,
            "separability": self.separability,
            "alpha": self.alpha,
            "sample_rate_hz": self.sample_rate_hz,
            "evoked_component": self.evoked_component,
            "seed": self.seed,
            "signature_seed": self.signature_seed,
            "n_scalp": self.n_scalp,
        }
