"""Simulated robot arm: seeded grasp outcomes, scenario actions and a socket bridge."""

from .bridge import RemoteExecutor, RobotBridgeServer, parse_request
from .executor import (
    ActionKind,
    ActionRequest,
    ActionResult,
    Executor,
    Placement,
    Scenario,
    SimulatedExecutor,
    replay,
    resolve_action,
    scenario_map,
)
from .objects import DEFAULT_GRASP_PROBS, OBJECT_NAMES, ObjectSpec, RobotConfig

__all__ = [
    "DEFAULT_GRASP_PROBS",
    "OBJECT_NAMES",
    "ActionKind",
    "ActionRequest",
    "ActionResult",
    "Executor",
    "ObjectSpec",
    "Placement",
    "RemoteExecutor",
    "RobotBridgeServer",
    "RobotConfig",
    "Scenario",
    "SimulatedExecutor",
    "parse_request",
    "replay",
    "resolve_action",
    "scenario_map",
]
