"""
Epoch trimming and 500 ms analysis windows.

Windows tile an interval of ``L`` samples exactly: ``n = ceil((L - w) / w) + 1``
windows with stride ``round((L - w) / (n - 1))``, the last one ending at ``L``.
Overlap is zero whenever ``w`` divides ``L``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from core.errors import ErrorCode, ValidationError
from core.recording import ClassLabel, Epoch

WINDOW_SECONDS = 0.5
TRIM_FRACTION = 0.10


@dataclass(frozen=True)
class AnalysisWindow:
    data: np.ndarray
    sample_rate_hz: float
    parent_trial: int
    window_index: int
    label: ClassLabel | None = None

    @property
    def n_samples(self) -> int:
        return int(self.data.shape[-1])


def window_length(sample_rate_hz: float) -> int:
    return int(round(WINDOW_SECONDS * sample_rate_hz))


def tile_windows(n_samples: int, w: int) -> list[tuple[int, int]]:
    """
    Exact-cover tiling of ``[0, n_samples)`` by windows of ``w`` samples.

    Returns:
        ``(start, stop)`` pairs in time order

    Raises:
        ValidationError: If the interval is shorter than one window
    """
    if w <= 0 or n_samples < w:
        raise ValidationError(
            code=ErrorCode.VALUE_OUT_OF_RANGE,
            user_message=f"Segment of {n_samples} samples is shorter than one {w}-sample window",
            field="n_samples",
        )
    n = math.ceil((n_samples - w) / w) + 1
    if n == 1:
        return [(0, w)]
    stride = round((n_samples - w) / (n - 1))
    starts = [i * stride for i in range(n - 1)] + [n_samples - w]
    return [(s, s + w) for s in starts]


def window_segment(
    data: np.ndarray, sample_rate_hz: float, parent_trial: int = 0, label: ClassLabel | None = None
) -> list[AnalysisWindow]:
    """Tile an untrimmed ``[channels × samples]`` segment into analysis windows."""
    w = window_length(sample_rate_hz)
    return [
        AnalysisWindow(np.asarray(data[:, start:stop]), sample_rate_hz, parent_trial, i, label)
        for i, (start, stop) in enumerate(tile_windows(int(data.shape[1]), w))
    ]


def trim_and_window(ep: Epoch) -> list[AnalysisWindow]:
    """
    Drop 10% of the epoch at each end and tile the rest into 500 ms windows.

    Windows hold the scalp channels only.

    Raises:
        ValidationError: If the trimmed epoch is shorter than one window
    """
    total = ep.n_samples
    trim = math.floor(TRIM_FRACTION * total)
    trimmed = ep.scalp_data()[:, trim : total - trim]
    return window_segment(trimmed, ep.sample_rate_hz, ep.trial_id, ep.label)
