"""
Stochastic robot executor.

Each action draws two uniforms from the executor's seeded generator: one
decides the grasp (success when below the object's probability), the other
sets the execution time within ``mean * (1 ± jitter)``. Placement always
succeeds once the object is held. The draws are returned with every result so
a run can be replayed without the generator.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Protocol

import numpy as np

from core.errors import ErrorCode, ValidationError
from core.recording import ClassLabel, MiClass, Task

from .objects import OBJECT_NAMES, ObjectSpec, RobotConfig

logger = logging.getLogger(__name__)


class Placement(Enum):
    LEFT = "Left"
    RIGHT = "Right"

    @classmethod
    def from_label(cls, label: ClassLabel) -> Placement:
        if label.task is not Task.MI:
            raise ValidationError(code=ErrorCode.INVALID_INPUT, user_message=f"{label} does not name a side", field="label")
        return cls.LEFT if label.value == MiClass.LEFT else cls.RIGHT


class Scenario(Enum):
    """
    Action map applied to a decoded (object, side) pair.

    Placement is deterministic once the grasp succeeds, in every scenario: a
    HiddenObject reveal has no separate place step, so its ``place_ok`` is the
    grasp outcome and no extra draw is taken.
    """

    BASE_DEMO = "BaseDemo"
    HIDDEN_OBJECT = "HiddenObject"
    DIRECT_HANDOVER = "DirectHandover"


class ActionKind(Enum):
    PICK_AND_PLACE = "PickAndPlace"
    REVEAL = "Reveal"
    HANDOVER = "Handover"


_ACTIONS = {
    Scenario.BASE_DEMO: ActionKind.PICK_AND_PLACE,
    Scenario.HIDDEN_OBJECT: ActionKind.REVEAL,
    Scenario.DIRECT_HANDOVER: ActionKind.HANDOVER,
}


@dataclass(frozen=True)
class ActionRequest:
    object: ObjectSpec
    placement: Placement | None
    scenario: Scenario

    @property
    def action(self) -> ActionKind:
        return _ACTIONS[self.scenario]

    def describe(self) -> str:
        if self.action is ActionKind.REVEAL:
            return f"reveal {self.object.name}"
        side = self.placement.value if self.placement else "?"
        if self.action is ActionKind.HANDOVER:
            return f"hand {self.object.name} to {side.lower()} hand"
        return f"pick {self.object.name}, place {side}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "object": self.object.name,
            "placement": self.placement.value if self.placement else None,
            "scenario": self.scenario.value,
        }


@dataclass(frozen=True)
class ActionResult:
    grasp_ok: bool
    place_ok: bool
    elapsed_seconds: float
    rng_draws: tuple[float, ...]

    @property
    def success(self) -> bool:
        return self.grasp_ok and self.place_ok

    def to_dict(self) -> dict[str, Any]:
        return {
            "grasp_ok": self.grasp_ok,
            "place_ok": self.place_ok,
            "elapsed_seconds": self.elapsed_seconds,
            "rng_draws": list(self.rng_draws),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ActionResult:
        return cls(
            grasp_ok=bool(data["grasp_ok"]),
            place_ok=bool(data["place_ok"]),
            elapsed_seconds=float(data["elapsed_seconds"]),
            rng_draws=tuple(float(d) for d in data["rng_draws"]),
        )


class Executor(Protocol):
    def execute(self, req: ActionRequest) -> ActionResult: ...


def scenario_map(
    decoded_vi: ClassLabel, decoded_mi: ClassLabel | None, scenario: Scenario, config: RobotConfig | None = None
) -> ActionRequest:
    """
    Turn decoded (object, side) into a robot action.

    BaseDemo picks the object and places it on the decoded side; HiddenObject
    reveals the object and ignores the side; DirectHandover hands the object to
    the decoded hand.
    """
    spec = (config or RobotConfig()).spec_for_label(decoded_vi)
    if scenario is Scenario.HIDDEN_OBJECT or decoded_mi is None:
        placement = None
    else:
        placement = Placement.from_label(decoded_mi)
    return ActionRequest(spec, placement, scenario)


def resolve_action(req: ActionRequest, draws: tuple[float, float], jitter_fraction: float) -> ActionResult:
    """Outcome of ``req`` under the given uniform draws; pure. ``place_ok`` follows ``grasp_ok``."""
    u_grasp, u_time = draws
    grasp_ok = u_grasp < req.object.grasp_success_prob
    elapsed = req.object.mean_exec_seconds * (1.0 + jitter_fraction * (2.0 * u_time - 1.0))
    return ActionResult(grasp_ok=grasp_ok, place_ok=grasp_ok, elapsed_seconds=elapsed, rng_draws=(u_grasp, u_time))


class SimulatedExecutor:
    """In-process executor with its own seeded generator; requests are served strictly in order."""

    def __init__(self, config: RobotConfig | None = None, seed: int = 0) -> None:
        self.config = config or RobotConfig()
        self.seed = seed
        self._rng = np.random.default_rng(seed)
        self.log: list[tuple[ActionRequest, ActionResult]] = []

    def execute(self, req: ActionRequest) -> ActionResult:
        draws = (float(self._rng.random()), float(self._rng.random()))
        result = resolve_action(req, draws, self.config.jitter_fraction)
        self.log.append((req, result))
        logger.debug(
            f"{req.describe()}: grasp={result.grasp_ok} place={result.place_ok} "
            f"elapsed={result.elapsed_seconds:.3f}s draws={draws}"
        )
        return result

    def draw_object(self) -> ObjectSpec:
        """Random object from ``config.object_mix``."""
        weights = self.config.mix_weights()
        name = OBJECT_NAMES[int(self._rng.choice(len(OBJECT_NAMES), p=[weights[n] for n in OBJECT_NAMES]))]
        return self.config.object_spec(name)


def replay(requests: list[ActionRequest], draws: list[tuple[float, ...]], config: RobotConfig) -> list[ActionResult]:
    """
    Recompute results from logged draws.

    Raises:
        ValidationError: If the request and draw lists differ in length or a draw is malformed
    """
    if len(requests) != len(draws):
        raise ValidationError(
            code=ErrorCode.DIMENSION_MISMATCH,
            user_message=f"{len(requests)} requests but {len(draws)} logged draws",
            field="draws",
        )
    results = []
    for req, d in zip(requests, draws):
        if len(d) != 2:
            raise ValidationError(code=ErrorCode.INVALID_INPUT, user_message=f"Expected 2 draws per action, got {len(d)}", field="draws")
        results.append(resolve_action(req, (float(d[0]), float(d[1])), config.jitter_fraction))
    return results
