"""
Power spectral density and differential entropy.

The PSD of a window is a Hann-tapered one-sided periodogram with density
scaling, so integrating it over frequency gives the tapered mean-square power.
DE over a band is ``-sum(P * ln(max(P, 1e-12))) * df`` over bins ``lo <= f < hi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from core.errors import ErrorCode, NumericalError, ValidationError

from .bands import BandDef
from .windows import AnalysisWindow

MIN_WINDOW_SAMPLES = 64
LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class SpectrumEstimate:
    freqs_hz: np.ndarray
    psd: np.ndarray
    df_hz: float
    window_seconds: float


def periodogram(win: AnalysisWindow) -> SpectrumEstimate:
    """
    Hann-tapered one-sided periodogram of every channel in a window.

    Raises:
        ValidationError: If the window has fewer than 64 samples
    """
    n = win.n_samples
    if n < MIN_WINDOW_SAMPLES:
        raise ValidationError(
            code=ErrorCode.VALUE_OUT_OF_RANGE,
            user_message=f"Periodogram needs at least {MIN_WINDOW_SAMPLES} samples, window has {n}",
            field="data",
        )
    freqs, psd = signal.periodogram(
        np.asarray(win.data, dtype=np.float64),
        fs=win.sample_rate_hz,
        window="hann",
        detrend=False,
        return_onesided=True,
        scaling="density",
        axis=-1,
    )
    return SpectrumEstimate(
        freqs_hz=np.asarray(freqs),
        psd=np.atleast_2d(np.asarray(psd)),
        df_hz=win.sample_rate_hz / n,
        window_seconds=n / win.sample_rate_hz,
    )


def differential_entropy(spec: SpectrumEstimate, band: BandDef) -> np.ndarray:
    """
    Band DE per channel.

    Returns:
        Vector with one DE value per PSD row

    Raises:
        NumericalError: If no frequency bin falls inside the band
    """
    mask = (spec.freqs_hz >= band.lo_hz) & (spec.freqs_hz < band.hi_hz)
    if not mask.any():
        raise NumericalError(
            code=ErrorCode.EMPTY_BAND,
            user_message=f"Band {band.name.value} [{band.lo_hz}, {band.hi_hz}) Hz has no bins at df={spec.df_hz} Hz",
        )
    p = spec.psd[..., mask]
    return np.asarray(-np.sum(p * np.log(np.maximum(p, LOG_FLOOR)), axis=-1) * spec.df_hz)
