"""Frequency band definitions; the gamma band follows the band-pass profile."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from core.errors import ErrorCode, PipelineError

from ..preprocess.filters import FrequencyProfile


class BandName(Enum):
    DELTA = "Delta"
    THETA = "Theta"
    ALPHA = "Alpha"
    BETA = "Beta"
    GAMMA40 = "Gamma40"
    GAMMA60 = "Gamma60"
    GAMMA100 = "Gamma100"


@dataclass(frozen=True)
class BandDef:
    """Half-open band ``[lo_hz, hi_hz)``."""

    name: BandName
    lo_hz: float
    hi_hz: float

    @property
    def width_hz(self) -> float:
        return self.hi_hz - self.lo_hz


BAND_DEFS: dict[BandName, BandDef] = {
    BandName.DELTA: BandDef(BandName.DELTA, 0.5, 4.0),
    BandName.THETA: BandDef(BandName.THETA, 4.0, 8.0),
    BandName.ALPHA: BandDef(BandName.ALPHA, 8.0, 13.0),
    BandName.BETA: BandDef(BandName.BETA, 13.0, 30.0),
    BandName.GAMMA40: BandDef(BandName.GAMMA40, 30.0, 40.0),
    BandName.GAMMA60: BandDef(BandName.GAMMA60, 30.0, 60.0),
    BandName.GAMMA100: BandDef(BandName.GAMMA100, 30.0, 100.0),
}

_GAMMA_BY_PROFILE = {
    FrequencyProfile.F40: BandName.GAMMA40,
    FrequencyProfile.F60: BandName.GAMMA60,
    FrequencyProfile.F100: BandName.GAMMA100,
}


def gamma_band_for(profile: FrequencyProfile) -> BandDef:
    return BAND_DEFS[_GAMMA_BY_PROFILE[profile]]


def bands_for_profile(profile: FrequencyProfile) -> list[BandDef]:
    """Delta, theta, alpha, beta and the gamma band matching ``profile``, in feature order."""
    base = [BAND_DEFS[name] for name in (BandName.DELTA, BandName.THETA, BandName.ALPHA, BandName.BETA)]
    return [*base, gamma_band_for(profile)]


def check_band_set(bands: list[BandDef], profile: FrequencyProfile) -> None:
    """
    Reject a band set whose gamma band does not match the profile.

    Raises:
        PipelineError: On a gamma/profile mismatch
    """
    gammas = [b for b in bands if b.name in _GAMMA_BY_PROFILE.values()]
    expected = gamma_band_for(profile)
    if gammas != [expected]:
        found = ", ".join(b.name.value for b in gammas) or "none"
        raise PipelineError(
            code=ErrorCode.PROFILE_MISMATCH,
            user_message=f"Profile {profile.value} requires band {expected.name.value}, band set has {found}",
        )
