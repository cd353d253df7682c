"""
Zero-phase IIR filters.

Band-pass filtering uses an order-4 Butterworth design in second-order sections
applied forward and backward; the line-noise notch is a Q=30 biquad at 50 Hz,
also applied forward and backward. Filters act on whole continuous recordings
so epoch interiors stay free of edge transients.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np
from scipy import signal

from core.errors import ErrorCode, ValidationError
from core.recording import Recording

logger = logging.getLogger(__name__)

BUTTERWORTH_ORDER = 4
NOTCH_HZ = 50.0
NOTCH_Q = 30.0
HIGHPASS_HZ = 0.5


class FilterKind(Enum):
    BAND_PASS = "BandPass"
    NOTCH = "Notch"


class FrequencyProfile(Enum):
    """The three band-pass cutoffs; each pairs with one gamma band."""

    F40 = "F40"
    F60 = "F60"
    F100 = "F100"

    @property
    def band(self) -> tuple[float, float]:
        return (HIGHPASS_HZ, float(self.value[1:]))

    @property
    def high_hz(self) -> float:
        return self.band[1]


@dataclass(frozen=True)
class FilterSpec:
    """
    Filter design parameters.

    ``low_hz``/``high_hz`` apply to band-pass filters, ``notch_hz``/``q`` to the notch.
    """

    kind: FilterKind
    low_hz: float = HIGHPASS_HZ
    high_hz: float = 40.0
    notch_hz: float = NOTCH_HZ
    order: int = BUTTERWORTH_ORDER
    q: float = NOTCH_Q

    @classmethod
    def for_profile(cls, profile: FrequencyProfile) -> FilterSpec:
        low, high = profile.band
        return cls(kind=FilterKind.BAND_PASS, low_hz=low, high_hz=high)

    @classmethod
    def notch(cls, notch_hz: float = NOTCH_HZ, q: float = NOTCH_Q) -> FilterSpec:
        return cls(kind=FilterKind.NOTCH, notch_hz=notch_hz, q=q)

    def validate(self, sample_rate_hz: float) -> None:
        """
        Check the cutoffs against the Nyquist frequency.

        Raises:
            ValidationError: If a cutoff is at or above Nyquist or the band is inverted
        """
        nyquist = sample_rate_hz / 2.0
        if self.kind is FilterKind.BAND_PASS:
            if not 0 < self.low_hz < self.high_hz:
                raise ValidationError(
                    code=ErrorCode.VALUE_OUT_OF_RANGE,
                    user_message=f"Band-pass needs 0 < low ({self.low_hz}) < high ({self.high_hz})",
                    field="low_hz",
                )
            if self.high_hz >= nyquist:
                raise ValidationError(
                    code=ErrorCode.VALUE_OUT_OF_RANGE,
                    user_message=f"Cutoff {self.high_hz} Hz is not below Nyquist ({nyquist} Hz)",
                    field="high_hz",
                )
        elif self.notch_hz >= nyquist:
            raise ValidationError(
                code=ErrorCode.VALUE_OUT_OF_RANGE,
                user_message=f"Notch {self.notch_hz} Hz is not below Nyquist ({nyquist} Hz)",
                field="notch_hz",
            )

    def design_sos(self, sample_rate_hz: float) -> np.ndarray:
        """Second-order sections of the band-pass design."""
        self.validate(sample_rate_hz)
        return np.asarray(
            signal.butter(self.order, [self.low_hz, self.high_hz], btype="bandpass", fs=sample_rate_hz, output="sos")
        )

    def design_ba(self, sample_rate_hz: float) -> tuple[np.ndarray, np.ndarray]:
        """Numerator/denominator of the notch biquad."""
        self.validate(sample_rate_hz)
        b, a = signal.iirnotch(self.notch_hz, self.q, fs=sample_rate_hz)
        return np.asarray(b), np.asarray(a)

    def to_dict(self) -> dict[str, Any]:
        if self.kind is FilterKind.BAND_PASS:
            return {
                "kind": self.kind.value,
                "design": f"Butterworth order {self.order}, forward-backward",
                "low_hz": self.low_hz,
                "high_hz": self.high_hz,
            }
        return {"kind": self.kind.value, "design": "IIR notch biquad, forward-backward", "notch_hz": self.notch_hz, "q": self.q}


def filter_array(data: np.ndarray, spec: FilterSpec, sample_rate_hz: float) -> np.ndarray:
    """Zero-phase filter a ``[channels × samples]`` array in float64 along time."""
    data = np.asarray(data, dtype=np.float64)
    if spec.kind is FilterKind.BAND_PASS:
        return np.asarray(signal.sosfiltfilt(spec.design_sos(sample_rate_hz), data, axis=-1))
    b, a = spec.design_ba(sample_rate_hz)
    return np.asarray(signal.filtfilt(b, a, data, axis=-1))


def bandpass(rec: Recording, profile: FrequencyProfile) -> Recording:
    """
    Zero-phase order-4 Butterworth band-pass of every channel.

    Args:
        rec: Continuous recording
        profile: Cutoff profile (0.5-40, 0.5-60 or 0.5-100 Hz)

    Returns:
        Filtered recording (float64 samples) with unchanged triggers and length

    Raises:
        ValidationError: If the upper cutoff is not below Nyquist
    """
    spec = FilterSpec.for_profile(profile)
    logger.debug(f"Band-pass {spec.low_hz}-{spec.high_hz} Hz on {rec.n_channels} channels")
    return rec.with_samples(filter_array(rec.samples, spec, rec.sample_rate_hz))


def notch50(rec: Recording) -> Recording:
    """
    Zero-phase 50 Hz notch (Q = 30) of every channel.

    Raises:
        ValidationError: If the sample rate is not above 100 Hz
    """
    if rec.sample_rate_hz <= 2 * NOTCH_HZ:
        raise ValidationError(
            code=ErrorCode.VALUE_OUT_OF_RANGE,
            user_message=f"Notch at {NOTCH_HZ} Hz needs a sample rate above {2 * NOTCH_HZ} Hz",
            field="sample_rate_hz",
        )
    return rec.with_samples(filter_array(rec.samples, FilterSpec.notch(), rec.sample_rate_hz))
