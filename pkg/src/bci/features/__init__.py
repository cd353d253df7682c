"""Trimming, 500 ms windowing, Hann periodograms and differential-entropy features."""

from .bands import BAND_DEFS, BandDef, BandName, bands_for_profile, check_band_set, gamma_band_for
from .extract import FeatureVector, extract_features, extract_window_features, feature_names, window_tensor
from .spectral import SpectrumEstimate, differential_entropy, periodogram
from .table import FeatureTable, read_feature_table, write_epoch_features, write_feature_table
from .windows import AnalysisWindow, tile_windows, trim_and_window, window_length, window_segment

__all__ = [
    "BAND_DEFS",
    "AnalysisWindow",
    "BandDef",
    "BandName",
    "FeatureTable",
    "FeatureVector",
    "SpectrumEstimate",
    "bands_for_profile",
    "check_band_set",
    "differential_entropy",
    "extract_features",
    "extract_window_features",
    "feature_names",
    "gamma_band_for",
    "periodogram",
    "read_feature_table",
    "tile_windows",
    "trim_and_window",
    "window_length",
    "window_segment",
    "window_tensor",
    "write_epoch_features",
    "write_feature_table",
]
