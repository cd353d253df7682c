"""
Per-window DE feature vectors.

Feature order is channel-major: all bands of scalp channel 0, then all bands
of channel 1, and so on. At the default montage a window yields 59 x 5 = 295
values.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from core.errors import ErrorCode, NumericalError
from core.recording import ChannelInfo, ChannelRole, ClassLabel, Epoch

from ..preprocess.filters import FrequencyProfile
from .bands import BandDef, bands_for_profile
from .spectral import differential_entropy, periodogram
from .windows import AnalysisWindow, trim_and_window

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    trial_id: int
    window_index: int
    label: ClassLabel | None
    band_set: tuple[BandDef, ...] = field(default_factory=tuple)


def extract_window_features(win: AnalysisWindow, bands: list[BandDef]) -> np.ndarray:
    """
    DE values of one window, channel-major.

    Raises:
        NumericalError: If a value is not finite
    """
    spectrum = periodogram(win)
    matrix = np.stack([differential_entropy(spectrum, band) for band in bands], axis=1)
    values = matrix.reshape(-1)
    if not np.all(np.isfinite(values)):
        raise NumericalError(
            code=ErrorCode.INVALID_INPUT,
            user_message=f"Non-finite DE feature in trial {win.parent_trial}, window {win.window_index}",
        )
    return values


def extract_features(ep: Epoch, profile: FrequencyProfile) -> list[FeatureVector]:
    """
    Trim, window and compute DE over the profile's band set for every window.

    Args:
        ep: Epoch preprocessed under ``profile``
        profile: Frequency profile selecting the gamma band

    Returns:
        One FeatureVector per window, labelled like the epoch
    """
    bands = bands_for_profile(profile)
    vectors = [
        FeatureVector(extract_window_features(win, bands), ep.trial_id, win.window_index, ep.label, tuple(bands))
        for win in trim_and_window(ep)
    ]
    logger.debug(f"Trial {ep.trial_id}: {len(vectors)} windows x {vectors[0].values.size if vectors else 0} features")
    return vectors


def window_tensor(ep: Epoch) -> np.ndarray:
    """Time-domain scalp windows ``[n_windows × n_scalp × w]`` of an epoch, for the CNN."""
    return np.stack([win.data for win in trim_and_window(ep)]).astype(np.float64)


def feature_names(channels: tuple[ChannelInfo, ...] | list[ChannelInfo], bands: list[BandDef]) -> list[str]:
    """Column names ``<channel>:<band>`` in feature order."""
    scalp = [ch.name for ch in channels if ch.role is ChannelRole.SCALP_EEG]
    return [f"{name}:{band.name.value}" for name in scalp for band in bands]
