"""
Run configuration schema and defaults for the imagery BCI system.

This module provides the configuration defaults, the JSON Schema every run
configuration is validated against, and the data-directory lookup.
"""

import os
from pathlib import Path
from typing import Any

# Environment variable naming the default data directory
DATA_DIR_ENV = "IMAGERY_BCI_DATA_DIR"

# JSON Schema version for config compatibility
SCHEMA_VERSION = "1.0.0"

# Published per-stage operation times (seconds) used as the nominal timing budget
NOMINAL_STAGE_SECONDS: dict[str, float] = {
    "prepare": 6.010,
    "vi_task": 15.000,
    "vi_data_proc": 0.639,
    "vi_infer": 8.191,
    "mi_task": 15.000,
    "mi_data_proc": 0.524,
    "mi_infer": 8.000,
    "robot_exec": 54.872,
}

DECODER_KINDS = ["Ridge", "Knn", "DecisionTree", "LinearSvm", "Mlp", "CompactCnn"]
PROFILES = ["F40", "F60", "F100"]

# Default configuration with all supported keys and JSON-serializable types
DEFAULT_CONFIG: dict[str, Any] = {
    "schema_version": SCHEMA_VERSION,
    "paths": {
        "data_dir": "",  # Resolved from the environment at runtime
        "output_dir": "out",
    },
    "montage": {"n_scalp": 59},
    "synth": {
        "task": "MI",
        "n_trials": 100,
        "separability": 0.5,
        "alpha": 1.0,
        "sample_rate_hz": 1000.0,
        "evoked_component": False,
        "signature_seed": 0,
    },
    "preprocess": {
        "profile": "F40",
        "notch": True,
        "rereference": True,
        "ica": True,
        "ica_max_iter": 500,
        "ica_tol": 1e-5,
        "ica_threshold": 0.95,
    },
    "train": {
        "kinds": list(DECODER_KINDS),
        "profiles": list(PROFILES),
        "phase": "Imagery",
        "epochs": 1000,
        "learning_rate": 1e-3,
        "batch_size": 64,
        "l2": 1e-4,
        "test_fraction": 0.2,
    },
    "pipeline": {
        "vi_model": "",
        "mi_model": "",
        "profile": "F40",
        "crop_start_s": 3.0,
        "crop_end_s": 13.0,
        "aggregation": "MajorityVote",
        "scenario": "BaseDemo",
        "timing_mode": "Nominal",
        "timing_budget": dict(NOMINAL_STAGE_SECONDS),
        "n_trials": 50,
        "simulated_vi_accuracy": 0.4023,
        "simulated_mi_accuracy": 0.6259,
    },
    "stream": {
        "host": "127.0.0.1",
        "port": 7878,
        "chunk_size": 40,
        "clock_mode": "Unpaced",
        "accel_factor": 1.0,
        "ring_seconds": 20.0,
        "queue_capacity": 8,
    },
    "robot": {
        "grasp_probs": {"Apple": 0.8983, "Banana": 0.5584, "Orange": 0.8444},
        "object_mix": {"Apple": 1.0, "Banana": 1.0, "Orange": 1.0},
        "mean_exec_seconds": 54.872,
        "jitter_fraction": 0.1,
    },
    "seeds": {"synth": 7, "split": 0, "train": 0, "robot": 0, "decoder_sim": 0},
    "logging": {"level": "INFO", "file": ""},
}

_NUMBER = {"type": "number"}
_FRACTION = {"type": "number", "minimum": 0.0, "maximum": 1.0}
_POS_INT = {"type": "integer", "minimum": 1}
_SEED = {"type": "integer", "minimum": 0}
_PER_FRUIT = {
    "type": "object",
    "additionalProperties": False,
    "properties": {"Apple": _FRACTION, "Banana": _FRACTION, "Orange": _FRACTION},
}


def _section(properties: dict[str, Any]) -> dict[str, Any]:
    return {"type": "object", "additionalProperties": False, "properties": properties}


# JSON Schema for run configuration validation (draft-07)
RUN_CONFIG_JSON_SCHEMA: dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "Imagery BCI run configuration",
    "description": "Paths, montage, synthesis, preprocessing, training, pipeline, stream and robot settings",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "schema_version": {"type": "string", "const": SCHEMA_VERSION},
        "paths": _section({"data_dir": {"type": "string"}, "output_dir": {"type": "string"}}),
        "montage": _section({"n_scalp": {"type": "integer", "minimum": 2, "maximum": 256}}),
        "synth": _section(
            {
                "task": {"type": "string", "enum": ["VI", "MI"]},
                "n_trials": _POS_INT,
                "separability": _FRACTION,
                "alpha": {"type": "number", "minimum": 0.0, "maximum": 3.0},
                "sample_rate_hz": {"type": "number", "exclusiveMinimum": 200.0},
                "evoked_component": {"type": "boolean"},
                "signature_seed": _SEED,
            }
        ),
        "preprocess": _section(
            {
                "profile": {"type": "string", "enum": PROFILES},
                "notch": {"type": "boolean"},
                "rereference": {"type": "boolean"},
                "ica": {"type": "boolean"},
                "ica_max_iter": _POS_INT,
                "ica_tol": {"type": "number", "exclusiveMinimum": 0.0},
                "ica_threshold": _FRACTION,
            }
        ),
        "train": _section(
            {
                "kinds": {"type": "array", "items": {"type": "string", "enum": DECODER_KINDS}, "minItems": 1},
                "profiles": {"type": "array", "items": {"type": "string", "enum": PROFILES}, "minItems": 1},
                "phase": {"type": "string", "enum": ["Imagery", "Perception"]},
                "epochs": _POS_INT,
                "learning_rate": {"type": "number", "exclusiveMinimum": 0.0},
                "batch_size": _POS_INT,
                "l2": {"type": "number", "minimum": 0.0},
                "test_fraction": {"type": "number", "exclusiveMinimum": 0.0, "exclusiveMaximum": 1.0},
            }
        ),
        "pipeline": _section(
            {
                "vi_model": {"type": "string"},
                "mi_model": {"type": "string"},
                "profile": {"type": "string", "enum": PROFILES},
                "crop_start_s": {"type": "number", "minimum": 0.0, "maximum": 15.0},
                "crop_end_s": {"type": "number", "minimum": 0.0, "maximum": 15.0},
                "aggregation": {"type": "string", "enum": ["MajorityVote", "MeanScore"]},
                "scenario": {"type": "string", "enum": ["BaseDemo", "HiddenObject", "DirectHandover"]},
                "timing_mode": {"type": "string", "enum": ["Nominal", "Measured"]},
                "timing_budget": _section({name: {"type": "number", "minimum": 0.0} for name in NOMINAL_STAGE_SECONDS}),
                "n_trials": {"type": "integer", "minimum": 0},
                "simulated_vi_accuracy": _FRACTION,
                "simulated_mi_accuracy": _FRACTION,
            }
        ),
        "stream": _section(
            {
                "host": {"type": "string"},
                "port": {"type": "integer", "minimum": 0, "maximum": 65535},
                "chunk_size": _POS_INT,
                "clock_mode": {"type": "string", "enum": ["Realtime", "Accelerated", "Unpaced"]},
                "accel_factor": {"type": "number", "exclusiveMinimum": 0.0},
                "ring_seconds": {"type": "number", "minimum": 20.0},
                "queue_capacity": _POS_INT,
            }
        ),
        "robot": _section(
            {
                "grasp_probs": _PER_FRUIT,
                "object_mix": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {name: {"type": "number", "minimum": 0.0} for name in ("Apple", "Banana", "Orange")},
                },
                "mean_exec_seconds": _NUMBER,
                "jitter_fraction": _FRACTION,
            }
        ),
        "seeds": _section({name: _SEED for name in ("synth", "split", "train", "robot", "decoder_sim")}),
        "logging": _section(
            {"level": {"type": "string", "enum": ["DEBUG", "INFO", "WARNING", "ERROR"]}, "file": {"type": "string"}}
        ),
    },
}


def get_default_data_dir() -> Path:
    """
    Get the default data directory.

    Returns:
        ``$IMAGERY_BCI_DATA_DIR`` when set, otherwise ``./data``
    """
    env_dir = os.environ.get(DATA_DIR_ENV, "").strip()
    if env_dir:
        return Path(env_dir).expanduser()
    return Path.cwd() / "data"


def ensure_output_dir(path: Path) -> Path:
    """
    Ensure an output directory exists.

    Args:
        path: Directory to create if missing

    Returns:
        The same path, for chaining
    """
    path.mkdir(parents=True, exist_ok=True)
    return path
