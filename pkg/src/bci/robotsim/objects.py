"""Graspable objects and the robot configuration."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from core.errors import ErrorCode, ValidationError
from core.recording import ClassLabel, Task, ViClass

# Per-object grasp success rates measured on the physical arm
DEFAULT_GRASP_PROBS: dict[str, float] = {"Apple": 0.8983, "Banana": 0.5584, "Orange": 0.8444}
DEFAULT_EXEC_SECONDS = 54.872
DEFAULT_JITTER_FRACTION = 0.1

OBJECT_NAMES = tuple(c.name.title() for c in ViClass)


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    grasp_success_prob: float
    mean_exec_seconds: float = DEFAULT_EXEC_SECONDS

    def __post_init__(self) -> None:
        if self.name not in OBJECT_NAMES:
            raise ValidationError(code=ErrorCode.INVALID_INPUT, user_message=f"Unknown object {self.name!r}", field="name")
        if not 0.0 <= self.grasp_success_prob <= 1.0:
            raise ValidationError(
                code=ErrorCode.VALUE_OUT_OF_RANGE,
                user_message=f"Grasp probability of {self.name} must lie in [0, 1]",
                field="grasp_success_prob",
            )


@dataclass(frozen=True)
class RobotConfig:
    """
    Executor settings.

    ``object_mix`` holds relative weights of the objects in a random object
    stream; it only matters for Monte-Carlo runs that draw objects.
    """

    grasp_probs: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_GRASP_PROBS))
    object_mix: dict[str, float] = field(default_factory=lambda: {name: 1.0 for name in OBJECT_NAMES})
    mean_exec_seconds: float = DEFAULT_EXEC_SECONDS
    jitter_fraction: float = DEFAULT_JITTER_FRACTION

    def __post_init__(self) -> None:
        for name in (*self.grasp_probs, *self.object_mix):
            if name not in OBJECT_NAMES:
                raise ValidationError(code=ErrorCode.INVALID_INPUT, user_message=f"Unknown object {name!r}", field="robot")
        if any(w < 0 for w in self.object_mix.values()) or sum(self.object_mix.values()) <= 0:
            raise ValidationError(
                code=ErrorCode.VALUE_OUT_OF_RANGE, user_message="object_mix weights must be >= 0 with a positive sum", field="object_mix"
            )
        if not 0.0 <= self.jitter_fraction < 1.0:
            raise ValidationError(
                code=ErrorCode.VALUE_OUT_OF_RANGE, user_message="jitter_fraction must lie in [0, 1)", field="jitter_fraction"
            )

    def object_spec(self, name: str) -> ObjectSpec:
        """
        Raises:
            ValidationError: For a name outside Apple, Banana, Orange
        """
        if name not in OBJECT_NAMES:
            raise ValidationError(code=ErrorCode.INVALID_INPUT, user_message=f"Unknown object {name!r}", field="object")
        prob = self.grasp_probs.get(name, DEFAULT_GRASP_PROBS[name])
        return ObjectSpec(name, prob, self.mean_exec_seconds)

    def spec_for_label(self, label: ClassLabel) -> ObjectSpec:
        if label.task is not Task.VI:
            raise ValidationError(code=ErrorCode.INVALID_INPUT, user_message=f"{label} does not name an object", field="label")
        return self.object_spec(label.name)

    def mix_weights(self) -> dict[str, float]:
        """Normalized object weights over every object."""
        raw = {name: self.object_mix.get(name, 0.0) for name in OBJECT_NAMES}
        total = sum(raw.values())
        return {name: w / total for name, w in raw.items()}

    def expected_grasp_rate(self) -> float:
        """Grasp success rate of a random object drawn from ``object_mix``."""
        return sum(w * self.object_spec(name).grasp_success_prob for name, w in self.mix_weights().items())

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RobotConfig:
        return cls(
            grasp_probs={**DEFAULT_GRASP_PROBS, **{k: float(v) for k, v in data.get("grasp_probs", {}).items()}},
            object_mix={k: float(v) for k, v in data.get("object_mix", {n: 1.0 for n in OBJECT_NAMES}).items()},
            mean_exec_seconds=float(data.get("mean_exec_seconds", DEFAULT_EXEC_SECONDS)),
            jitter_fraction=float(data.get("jitter_fraction", DEFAULT_JITTER_FRACTION)),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "grasp_probs": dict(self.grasp_probs),
            "object_mix": dict(self.object_mix),
            "mean_exec_seconds": self.mean_exec_seconds,
            "jitter_fraction": self.jitter_fraction,
        }
