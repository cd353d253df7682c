"""Seeded synthetic VI/MI sessions with a controllable class separability."""

from .config import MI_TIMING, VI_TIMING, OnlineTiming, ParadigmTiming, SynthConfig, timing_for
from .generator import balanced_labels, blink_mixing, generate_online_stream_script, generate_session
from .noise import band_noise, pink_noise
from .signatures import MODULATION_DEPTH, ClassSignature, class_signatures, lateral_groups

__all__ = [
    "MI_TIMING",
    "MODULATION_DEPTH",
    "VI_TIMING",
    "ClassSignature",
    "OnlineTiming",
    "ParadigmTiming",
    "SynthConfig",
    "balanced_labels",
    "band_noise",
    "blink_mixing",
    "class_signatures",
    "generate_online_stream_script",
    "generate_session",
    "lateral_groups",
    "pink_noise",
    "timing_for",
]
