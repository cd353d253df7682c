"""
The preprocessing chain shared by offline training and online decoding.

Order: band-pass, 50 Hz notch, linked-mastoid re-reference, ICA. Offline the
chain fits ICA on the session; online it reuses the frozen model.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

from core.recording import Recording

from .filters import FilterSpec, FrequencyProfile, bandpass, notch50
from .ica import DEFAULT_MAX_ITER, DEFAULT_THRESHOLD, DEFAULT_TOL, IcaModel, apply_ica, fit_ica, reject_artifacts
from .reference import rereference_linked_mastoids

logger = logging.getLogger(__name__)


@dataclass
class PreprocessChain:
    """Configured preprocessing steps; ``ica_model`` is filled by ``fit`` or supplied frozen."""

    profile: FrequencyProfile = FrequencyProfile.F40
    notch: bool = True
    rereference: bool = True
    use_ica: bool = True
    ica_max_iter: int = DEFAULT_MAX_ITER
    ica_tol: float = DEFAULT_TOL
    ica_threshold: float = DEFAULT_THRESHOLD
    ica_seed: int = 0
    ica_model: IcaModel | None = field(default=None, repr=False)

    @classmethod
    def from_dict(cls, data: dict[str, Any], profile: FrequencyProfile | None = None) -> PreprocessChain:
        """Build from the ``preprocess`` config section; ``profile`` overrides the configured one."""
        return cls(
            profile=profile or FrequencyProfile(data.get("profile", "F40")),
            notch=bool(data.get("notch", True)),
            rereference=bool(data.get("rereference", True)),
            use_ica=bool(data.get("ica", True)),
            ica_max_iter=int(data.get("ica_max_iter", DEFAULT_MAX_ITER)),
            ica_tol=float(data.get("ica_tol", DEFAULT_TOL)),
            ica_threshold=float(data.get("ica_threshold", DEFAULT_THRESHOLD)),
        )

    def filter(self, rec: Recording) -> Recording:
        """Linear stages only: band-pass, notch and re-reference."""
        out = bandpass(rec, self.profile)
        if self.notch:
            out = notch50(out)
        if self.rereference:
            out = rereference_linked_mastoids(out)
        return out

    def fit(self, rec: Recording) -> Recording:
        """
        Run the full chain on a session, fitting ICA and marking artifact components.

        Returns:
            The cleaned session
        """
        out = self.filter(rec)
        if not self.use_ica:
            return out
        self.ica_model = fit_ica(out, self.ica_max_iter, self.ica_tol, seed=self.ica_seed)
        return reject_artifacts(out, self.ica_model, self.ica_threshold)

    def run(self, rec: Recording) -> Recording:
        """Apply the chain with the frozen ICA model (no refitting)."""
        out = self.filter(rec)
        if self.use_ica and self.ica_model is not None:
            out = apply_ica(out, self.ica_model)
        return out

    def provenance(self) -> dict[str, Any]:
        """Filter specs and ICA summary echoed into reports."""
        specs = [FilterSpec.for_profile(self.profile).to_dict()]
        if self.notch:
            specs.append(FilterSpec.notch().to_dict())
        info: dict[str, Any] = {
            "profile": self.profile.value,
            "filters": specs,
            "rereference": "linked mastoids" if self.rereference else "none",
        }
        if self.use_ica:
            info["ica"] = {
                "algorithm": "FastICA deflation, logcosh",
                "max_iter": self.ica_max_iter,
                "tol": self.ica_tol,
                "threshold": self.ica_threshold,
                "rejected": self.ica_model.rejected if self.ica_model else [],
            }
        return info
