"""
Model files.

Layout: ``magic "EEGM" | u32-LE header_len | header text | f32-LE parameter blob``.
The header records kind, task, profile, input layout, hyperparameters, seed and
the ordered list of parameter arrays with their shapes; the blob holds the
normalization statistics followed by every parameter array, in that order.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import numpy as np

from core.container import (
    FORMAT_VERSION,
    atomic_write_bytes,
    check_version,
    pack_container,
    read_bytes,
    unpack_container,
)
from core.errors import ErrorCode, FileError, ValidationError
from core.recording import Task

from ..preprocess.filters import FrequencyProfile
from .dataset import Representation
from .model import DecoderKind, DecoderModel, FeatureSpec

logger = logging.getLogger(__name__)

MODEL_MAGIC = b"EEGM"

_CLASSICAL_PARAMS: dict[DecoderKind, set[str]] = {
    DecoderKind.RIDGE: {"coef", "intercept"},
    DecoderKind.LINEAR_SVM: {"coef", "intercept"},
    DecoderKind.KNN: {"train_x", "train_y"},
    DecoderKind.DECISION_TREE: {"left", "right", "feature", "threshold", "value"},
}


def save_model(m: DecoderModel, path: Path | str) -> None:
    """Write a model file; see the module docstring for the layout."""
    arrays: list[tuple[str, np.ndarray]] = [("__mean__", m.feature_spec.mean), ("__std__", m.feature_spec.std)]
    arrays += [(name, m.params[name]) for name in sorted(m.params)]
    header: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "kind": m.kind.value,
        "task": m.task.value,
        "profile": m.profile.value,
        "n_classes": m.n_classes,
        "representation": m.feature_spec.representation.value,
        "input_shape": list(m.feature_spec.input_shape),
        "hyperparameters": m.hyperparameters,
        "seed": m.seed,
        "arrays": [{"name": name, "shape": list(array.shape)} for name, array in arrays],
    }
    blob = b"".join(np.ascontiguousarray(array, dtype="<f4").tobytes() for _, array in arrays)
    atomic_write_bytes(Path(path), pack_container(MODEL_MAGIC, header, blob))
    logger.info(f"Saved {m.kind.value} model to {path}")


def load_model(path: Path | str) -> DecoderModel:
    """
    Read a model file.

    Raises:
        FileError: On bad magic, version mismatch, blob length mismatch or
            parameters that do not fit the declared kind
    """
    header, blob = unpack_container(read_bytes(Path(path)), MODEL_MAGIC, path)
    check_version(header, path)

    try:
        kind = DecoderKind(header["kind"])
        task = Task(header["task"])
        profile = FrequencyProfile(header["profile"])
        representation = Representation(header["representation"])
        layout = [(item["name"], tuple(int(s) for s in item["shape"])) for item in header["arrays"]]
    except (KeyError, ValueError, TypeError) as e:
        raise FileError(code=ErrorCode.INVALID_FORMAT, user_message=f"Malformed model header in {path}: {e}") from e

    expected_len = sum(int(np.prod(shape)) for _, shape in layout) * 4
    if len(blob) != expected_len:
        raise FileError(
            code=ErrorCode.TRUNCATED_PAYLOAD,
            user_message=f"Model blob is {len(blob)} bytes, header describes {expected_len}",
            context={"path": str(path)},
        )

    arrays: dict[str, np.ndarray] = {}
    offset = 0
    for name, shape in layout:
        count = int(np.prod(shape))
        arrays[name] = np.frombuffer(blob, dtype="<f4", count=count, offset=offset).reshape(shape).astype(np.float32)
        offset += count * 4

    mean = arrays.pop("__mean__", None)
    std = arrays.pop("__std__", None)
    if mean is None or std is None:
        raise FileError(code=ErrorCode.INVALID_FORMAT, user_message=f"Model {path} has no normalization statistics")
    if kind in _CLASSICAL_PARAMS and set(arrays) != _CLASSICAL_PARAMS[kind]:
        raise FileError(
            code=ErrorCode.KIND_MISMATCH,
            user_message=f"Header kind {kind.value} does not match parameter set {sorted(arrays)}",
            context={"path": str(path)},
        )

    spec = FeatureSpec(representation, tuple(int(s) for s in header["input_shape"]), mean, std)
    try:
        model = DecoderModel(
            kind=kind,
            task=task,
            profile=profile,
            feature_spec=spec,
            params=arrays,
            seed=int(header.get("seed", 0)),
            hyperparameters=dict(header.get("hyperparameters", {})),
        )
    except ValidationError as e:
        raise FileError(
            code=ErrorCode.KIND_MISMATCH,
            user_message=f"Header kind {kind.value} does not match the stored parameters in {path}",
            technical_message=e.technical_message,
            context={"path": str(path)},
        ) from e
    logger.debug(f"Loaded {kind.value} model from {path}")
    return model
