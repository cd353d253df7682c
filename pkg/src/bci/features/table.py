"""
Headered binary feature tables (``magic "EEGF"``), using the recording container conventions.

The header lists row labels, trial ids and column names; the payload is the
row-major f32-LE feature matrix.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from core.container import (
    FORMAT_VERSION,
    atomic_write_bytes,
    check_version,
    decode_label,
    encode_label,
    pack_container,
    read_bytes,
    unpack_container,
)
from core.errors import ErrorCode, FileError, ValidationError
from core.recording import ClassLabel, Epoch

from ..preprocess.filters import FrequencyProfile
from .bands import bands_for_profile
from .extract import extract_features, feature_names

logger = logging.getLogger(__name__)

FEATURE_MAGIC = b"EEGF"


@dataclass(frozen=True)
class FeatureTable:
    matrix: np.ndarray
    labels: list[ClassLabel]
    trial_ids: list[int]
    columns: list[str]


def write_feature_table(
    path: Path | str, matrix: np.ndarray, labels: list[ClassLabel], trial_ids: list[int], band_names: list[str]
) -> None:
    """
    Write a feature matrix ``[n_rows × n_cols]`` with its labels and column names.

    Raises:
        ValidationError: If row or column counts disagree
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or len(labels) != matrix.shape[0] or len(trial_ids) != matrix.shape[0]:
        raise ValidationError(
            code=ErrorCode.DIMENSION_MISMATCH, user_message="Feature matrix, labels and trial ids disagree on row count"
        )
    if len(band_names) != matrix.shape[1]:
        raise ValidationError(
            code=ErrorCode.DIMENSION_MISMATCH,
            user_message=f"{len(band_names)} column names for {matrix.shape[1]} columns",
        )
    header = {
        "format_version": FORMAT_VERSION,
        "n_rows": int(matrix.shape[0]),
        "n_cols": int(matrix.shape[1]),
        "columns": list(band_names),
        "labels": [encode_label(label) for label in labels],
        "trial_ids": [int(t) for t in trial_ids],
    }
    payload = np.ascontiguousarray(matrix, dtype="<f4").tobytes()
    atomic_write_bytes(Path(path), pack_container(FEATURE_MAGIC, header, payload))
    logger.debug(f"Wrote feature table {path}: {matrix.shape[0]} x {matrix.shape[1]}")


def read_feature_table(path: Path | str) -> FeatureTable:
    """
    Read a table written by ``write_feature_table``.

    Raises:
        FileError: On bad magic, version mismatch or truncated payload
    """
    header, payload = unpack_container(read_bytes(Path(path)), FEATURE_MAGIC, path)
    check_version(header, path)
    rows, cols = int(header["n_rows"]), int(header["n_cols"])
    if len(payload) != rows * cols * 4:
        raise FileError(
            code=ErrorCode.TRUNCATED_PAYLOAD,
            user_message=f"Feature payload is {len(payload)} bytes, expected {rows * cols * 4}",
            context={"path": str(path)},
        )
    matrix = np.frombuffer(payload, dtype="<f4").reshape(rows, cols).astype(np.float32)
    labels = [decode_label(item) for item in header["labels"]]
    return FeatureTable(
        matrix=matrix,
        labels=[label for label in labels if label is not None],
        trial_ids=[int(t) for t in header["trial_ids"]],
        columns=list(header["columns"]),
    )


def write_epoch_features(path: Path | str, epochs: list[Epoch], profile: FrequencyProfile) -> FeatureTable:
    """
    Extract the DE features of every epoch and write them with ``<channel>:<band>`` column names.

    Raises:
        ValidationError: If there are no epochs
    """
    if not epochs:
        raise ValidationError(code=ErrorCode.EMPTY_INPUT, user_message="No epochs to tabulate")
    rows = [(ep, vec) for ep in epochs for vec in extract_features(ep, profile)]
    table = FeatureTable(
        matrix=np.stack([vec.values for _, vec in rows]).astype(np.float32),
        labels=[ep.label for ep, _ in rows],
        trial_ids=[ep.trial_id for ep, _ in rows],
        columns=feature_names(epochs[0].channels, bands_for_profile(profile)),
    )
    write_feature_table(path, table.matrix, table.labels, table.trial_ids, table.columns)
    return table
