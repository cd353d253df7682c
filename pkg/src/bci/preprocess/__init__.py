"""Band-pass, notch, linked-mastoid re-reference and ICA artifact rejection."""

from .chain import PreprocessChain
from .filters import FilterKind, FilterSpec, FrequencyProfile, bandpass, notch50
from .ica import IcaModel, apply_ica, fit_ica, load_ica, reject_artifacts, save_ica
from .reference import rereference_linked_mastoids

__all__ = [
    "FilterKind",
    "FilterSpec",
    "FrequencyProfile",
    "IcaModel",
    "PreprocessChain",
    "apply_ica",
    "bandpass",
    "fit_ica",
    "load_ica",
    "notch50",
    "reject_artifacts",
    "rereference_linked_mastoids",
    "save_ica",
]
