"""
Tests for windowing, spectra, differential entropy and feature tables.
"""

import numpy as np
import pytest

from bci.features import (
    BAND_DEFS,
    AnalysisWindow,
    BandDef,
    BandName,
    SpectrumEstimate,
    bands_for_profile,
    differential_entropy,
    extract_features,
    extract_window_features,
    feature_names,
    periodogram,
    read_feature_table,
    tile_windows,
    trim_and_window,
    window_length,
    window_segment,
    window_tensor,
    write_epoch_features,
    write_feature_table,
)
from bci.features.bands import check_band_set
from bci.preprocess import FrequencyProfile
from core.errors import ErrorCode, NumericalError, PipelineError, ValidationError
from core.recording import ClassLabel, Epoch, Phase, build_montage

FS = 1000.0


def _epoch(seconds: float, n_scalp: int = 8, seed: int = 0) -> Epoch:
    channels = build_montage(n_scalp)
    data = np.random.default_rng(seed).normal(size=(len(channels), int(seconds * FS)))
    return Epoch(data, FS, ClassLabel.mi(1), trial_id=3, phase=Phase.IMAGERY, channels=channels)


def _oracle_de(x: np.ndarray, fs: float, band: BandDef) -> float:
    """Direct rfft evaluation of the band sum with a periodic Hann taper."""
    n = x.size
    taper = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n)
    spectrum = np.fft.rfft(x * taper)
    psd = 2.0 * np.abs(spectrum) ** 2 / (fs * np.sum(taper**2))
    freqs = np.arange(spectrum.size) * fs / n
    total = 0.0
    for f, p in zip(freqs, psd, strict=True):
        if band.lo_hz <= f < band.hi_hz:
            total -= p * np.log(max(p, 1e-12))
    return total * fs / n


class TestWindowing:
    """Test exact-cover tiling and trimming."""

    def test_window_length(self):
        """Test that a window lasts 500 ms."""
        assert window_length(1000.0) == 500
        assert window_length(250.0) == 125

    def test_vi_epoch_gives_eight_windows(self):
        """Test that a 5 s epoch trimmed by 10% yields 8 windows with stride 500."""
        windows = trim_and_window(_epoch(5.0))
        assert len(windows) == 8
        assert all(w.n_samples == 500 for w in windows)
        assert windows[0].data.shape[0] == 8

    def test_mi_epoch_gives_seven_windows(self):
        """Test that a 4 s epoch trimmed by 10% yields 7 windows with stride 450."""
        tiles = tile_windows(3200, 500)
        assert len(tiles) == 7
        assert [b[0] - a[0] for a, b in zip(tiles, tiles[1:])] == [450] * 6
        assert tiles[-1] == (2700, 3200)
        assert len(trim_and_window(_epoch(4.0))) == 7

    def test_online_crop_gives_twenty_windows(self):
        """Test that a 10 s untrimmed segment yields 20 disjoint windows."""
        windows = window_segment(np.zeros((8, 10000)), FS)
        assert len(windows) == 20
        assert [w.window_index for w in windows] == list(range(20))

    def test_tiling_covers_interval(self):
        """Test that tiles start at 0 and the last ends at the interval length."""
        for length in (500, 501, 999, 1234, 4000):
            tiles = tile_windows(length, 500)
            assert tiles[0][0] == 0
            assert tiles[-1][1] == length

    def test_single_window(self):
        """Test that an interval of exactly one window gives one tile."""
        assert tile_windows(500, 500) == [(0, 500)]

    def test_too_short_interval(self):
        """Test that an interval shorter than a window is rejected."""
        with pytest.raises(ValidationError):
            tile_windows(499, 500)

    def test_window_tensor_shape(self):
        """Test the time-domain tensor consumed by the CNN."""
        assert window_tensor(_epoch(5.0)).shape == (8, 8, 500)


class TestBands:
    """Test band sets and the profile pairing."""

    def test_band_set_follows_profile(self):
        """Test that each profile carries its own gamma band."""
        for profile, gamma in (
            (FrequencyProfile.F40, BandName.GAMMA40),
            (FrequencyProfile.F60, BandName.GAMMA60),
            (FrequencyProfile.F100, BandName.GAMMA100),
        ):
            bands = bands_for_profile(profile)
            assert [b.name for b in bands[:4]] == [BandName.DELTA, BandName.THETA, BandName.ALPHA, BandName.BETA]
            assert bands[4].name is gamma

    def test_mismatched_gamma_rejected(self):
        """Test that a band set with the wrong gamma band is rejected."""
        with pytest.raises(PipelineError) as exc_info:
            check_band_set(bands_for_profile(FrequencyProfile.F40), FrequencyProfile.F100)
        assert exc_info.value.code == ErrorCode.PROFILE_MISMATCH


class TestDifferentialEntropy:
    """Test the periodogram and the band DE sum."""

    def test_matches_direct_evaluation(self):
        """Test DE against an independent rfft evaluation on 50 seeded windows."""
        rng = np.random.default_rng(42)
        bands = bands_for_profile(FrequencyProfile.F100)
        for i in range(50):
            x = rng.normal(0.0, 5.0, size=500)
            spec = periodogram(AnalysisWindow(x[None, :], FS, 0, i))
            for band in bands:
                expected = _oracle_de(x, FS, band)
                assert differential_entropy(spec, band)[0] == pytest.approx(expected, rel=1e-3)

    @pytest.mark.parametrize("name", [BandName.THETA, BandName.GAMMA40, BandName.GAMMA60, BandName.GAMMA100])
    def test_constant_psd_closed_form(self, name):
        """Test that a flat PSD c over a grid-aligned band gives -B c ln c."""
        c = 0.37
        freqs = np.arange(0.0, 501.0, 2.0)
        spec = SpectrumEstimate(freqs, np.full((1, freqs.size), c), 2.0, 0.5)
        band = BAND_DEFS[name]
        assert differential_entropy(spec, band)[0] == pytest.approx(-band.width_hz * c * np.log(c), abs=1e-9)

    def test_zero_psd_is_finite(self):
        """Test that a zero spectrum gives zero DE instead of NaN."""
        freqs = np.arange(0.0, 501.0, 2.0)
        spec = SpectrumEstimate(freqs, np.zeros((1, freqs.size)), 2.0, 0.5)
        assert differential_entropy(spec, BAND_DEFS[BandName.ALPHA])[0] == 0.0

    def test_empty_band(self):
        """Test that a band without bins raises EMPTY_BAND."""
        freqs = np.arange(0.0, 501.0, 2.0)
        spec = SpectrumEstimate(freqs, np.ones((1, freqs.size)), 2.0, 0.5)
        with pytest.raises(NumericalError) as exc_info:
            differential_entropy(spec, BandDef(BandName.DELTA, 0.5, 1.5))
        assert exc_info.value.code == ErrorCode.EMPTY_BAND

    def test_short_window_rejected(self):
        """Test that windows under 64 samples are refused."""
        with pytest.raises(ValidationError):
            periodogram(AnalysisWindow(np.zeros((1, 32)), FS, 0, 0))

    def test_periodogram_resolution(self):
        """Test the 2 Hz bin spacing of a 500 ms window."""
        spec = periodogram(AnalysisWindow(np.zeros((3, 500)), FS, 0, 0))
        assert spec.df_hz == 2.0
        assert spec.psd.shape == (3, 251)


class TestFeatureExtraction:
    """Test per-window feature vectors."""

    def test_channel_major_layout(self):
        """Test the feature count and that columns are grouped by channel."""
        ep = _epoch(5.0)
        vectors = extract_features(ep, FrequencyProfile.F40)
        assert len(vectors) == 8
        assert vectors[0].values.size == 8 * 5
        assert vectors[0].trial_id == 3
        assert vectors[0].label == ClassLabel.mi(1)

        bands = bands_for_profile(FrequencyProfile.F40)
        single = extract_window_features(trim_and_window(ep)[0], bands)
        np.testing.assert_array_equal(single, vectors[0].values)

        names = feature_names(ep.channels, bands)
        assert names[:5] == [f"Fp1:{b.name.value}" for b in bands]
        assert len(names) == 40

    def test_default_montage_feature_count(self):
        """Test that a 59-electrode window gives 295 features."""
        win = AnalysisWindow(np.random.default_rng(0).normal(size=(59, 500)), FS, 0, 0)
        assert extract_window_features(win, bands_for_profile(FrequencyProfile.F60)).size == 295


class TestFeatureTable:
    """Test the feature table container."""

    def test_round_trip(self, tmp_path):
        """Test that a written table reads back with labels and columns."""
        matrix = np.arange(12, dtype=np.float32).reshape(3, 4)
        labels = [ClassLabel.vi(0), ClassLabel.vi(1), ClassLabel.vi(2)]
        path = tmp_path / "features.eegf"
        write_feature_table(path, matrix, labels, [0, 0, 1], ["a", "b", "c", "d"])
        table = read_feature_table(path)
        np.testing.assert_array_equal(table.matrix, matrix)
        assert table.labels == labels
        assert table.trial_ids == [0, 0, 1]
        assert table.columns == ["a", "b", "c", "d"]

    def test_column_count_mismatch(self, tmp_path):
        """Test that column names must match the matrix width."""
        with pytest.raises(ValidationError):
            write_feature_table(tmp_path / "f.eegf", np.zeros((1, 2)), [ClassLabel.mi(0)], [0], ["only"])

    def test_epoch_features_carry_column_names(self, tmp_path):
        """Test that tabulated epochs are stored with channel:band column names."""
        path = tmp_path / "mi_F60_features.eegf"
        written = write_epoch_features(path, [_epoch(5.0), _epoch(5.0, seed=1)], FrequencyProfile.F60)
        table = read_feature_table(path)
        assert table.matrix.shape == (16, 40)
        assert table.columns == written.columns
        assert table.columns[:5] == ["Fp1:Delta", "Fp1:Theta", "Fp1:Alpha", "Fp1:Beta", "Fp1:Gamma60"]
        assert table.labels == [ClassLabel.mi(1)] * 16
        np.testing.assert_allclose(table.matrix[0], extract_features(_epoch(5.0), FrequencyProfile.F60)[0].values, rtol=1e-6, atol=1e-5)

    def test_no_epochs(self, tmp_path):
        """Test that an empty epoch list is refused."""
        with pytest.raises(ValidationError) as exc:
            write_epoch_features(tmp_path / "f.eegf", [], FrequencyProfile.F40)
        assert exc.value.code == ErrorCode.EMPTY_INPUT
