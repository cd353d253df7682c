"""Online pipeline settings and the per-stage timing ledger."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from core.config import NOMINAL_STAGE_SECONDS
from core.errors import ErrorCode, ValidationError

from ..preprocess import FrequencyProfile
from ..robotsim import Scenario

TASK_SECONDS = 15.0
STAGES = tuple(NOMINAL_STAGE_SECONDS)


class Aggregation(Enum):
    MAJORITY_VOTE = "MajorityVote"
    MEAN_SCORE = "MeanScore"


class TimingMode(Enum):
    """Nominal fills computed stages from the budget so reports are reproducible; Measured uses wall time."""

    NOMINAL = "Nominal"
    MEASURED = "Measured"


@dataclass(frozen=True)
class StageTiming:
    """Seconds spent per online stage; ``total`` is always the sum of the stages."""

    prepare: float = 0.0
    vi_task: float = 0.0
    vi_data_proc: float = 0.0
    vi_infer: float = 0.0
    mi_task: float = 0.0
    mi_data_proc: float = 0.0
    mi_infer: float = 0.0
    robot_exec: float = 0.0

    @property
    def total(self) -> float:
        return float(sum(getattr(self, name) for name in STAGES))

    def to_dict(self) -> dict[str, float]:
        return {**{name: float(getattr(self, name)) for name in STAGES}, "total": self.total}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> StageTiming:
        return cls(**{name: float(data.get(name, 0.0)) for name in STAGES})

    @classmethod
    def mean(cls, timings: list[StageTiming]) -> StageTiming:
        if not timings:
            return cls()
        return cls(**{name: sum(getattr(t, name) for t in timings) / len(timings) for name in STAGES})


@dataclass(frozen=True)
class PipelineConfig:
    vi_model: str = ""
    mi_model: str = ""
    profile: FrequencyProfile = FrequencyProfile.F40
    crop_start_s: float = 3.0
    crop_end_s: float = 13.0
    aggregation: Aggregation = Aggregation.MAJORITY_VOTE
    scenario: Scenario = Scenario.BASE_DEMO
    timing_mode: TimingMode = TimingMode.NOMINAL
    timing_budget: dict[str, float] = field(default_factory=lambda: dict(NOMINAL_STAGE_SECONDS))
    n_trials: int = 50
    simulated_vi_accuracy: float = 0.4023
    simulated_mi_accuracy: float = 0.6259

    def __post_init__(self) -> None:
        if not 0.0 <= self.crop_start_s < self.crop_end_s <= TASK_SECONDS:
            raise ValidationError(
                code=ErrorCode.VALUE_OUT_OF_RANGE,
                user_message=f"Decode crop [{self.crop_start_s}, {self.crop_end_s}] s must lie within [0, {TASK_SECONDS}] s",
                field="crop",
            )
        unknown = set(self.timing_budget) - set(STAGES)
        if unknown:
            raise ValidationError(
                code=ErrorCode.INVALID_INPUT, user_message=f"Unknown timing stages {sorted(unknown)}", field="timing_budget"
            )

    def crop_samples(self, fs: float) -> tuple[int, int]:
        return round(self.crop_start_s * fs), round(self.crop_end_s * fs)

    def budget(self, stage: str) -> float:
        return float(self.timing_budget.get(stage, NOMINAL_STAGE_SECONDS[stage]))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> PipelineConfig:
        return cls(
            vi_model=str(data.get("vi_model", "")),
            mi_model=str(data.get("mi_model", "")),
            profile=FrequencyProfile(data.get("profile", "F40")),
            crop_start_s=float(data.get("crop_start_s", 3.0)),
            crop_end_s=float(data.get("crop_end_s", 13.0)),
            aggregation=Aggregation(data.get("aggregation", "MajorityVote")),
            scenario=Scenario(data.get("scenario", "BaseDemo")),
            timing_mode=TimingMode(data.get("timing_mode", "Nominal")),
            timing_budget={**NOMINAL_STAGE_SECONDS, **{k: float(v) for k, v in data.get("timing_budget", {}).items()}},
            n_trials=int(data.get("n_trials", 50)),
            simulated_vi_accuracy=float(data.get("simulated_vi_accuracy", 0.4023)),
            simulated_mi_accuracy=float(data.get("simulated_mi_accuracy", 0.6259)),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "vi_model": self.vi_model,
            "mi_model": self.mi_model,
            "profile": self.profile.value,
            "crop_start_s": self.crop_start_s,
            "crop_end_s": self.crop_end_s,
            "aggregation": self.aggregation.value,
            "scenario": self.scenario.value,
            "timing_mode": self.timing_mode.value,
            "timing_budget": dict(self.timing_budget),
            "n_trials": self.n_trials,
            "simulated_vi_accuracy": self.simulated_vi_accuracy,
            "simulated_mi_accuracy": self.simulated_mi_accuracy,
        }
