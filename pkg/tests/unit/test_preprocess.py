"""
Tests for filtering, re-referencing and ICA artifact rejection.
"""

import logging

import numpy as np
import pytest

from bci.preprocess import (
    FilterSpec,
    FrequencyProfile,
    PreprocessChain,
    apply_ica,
    bandpass,
    fit_ica,
    load_ica,
    notch50,
    reject_artifacts,
    rereference_linked_mastoids,
    save_ica,
)
from conftest import make_recording
from core.errors import ErrorCode, ValidationError
from core.recording import ChannelInfo, ChannelRole, Recording, build_montage

FS = 1000.0


def _tone_recording(freq: float, seconds: float = 10.0, amplitude: float = 1.0, offset: float = 0.0) -> Recording:
    channels = build_montage(2)
    t = np.arange(int(seconds * FS)) / FS
    row = offset + amplitude * np.sin(2 * np.pi * freq * t)
    return Recording(channels, FS, np.tile(row, (len(channels), 1)))


def _middle(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    return x[..., n // 4 : 3 * n // 4]


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(x))))


class TestFilterSpec:
    """Test filter design parameters."""

    def test_profile_bands(self):
        """Test the three band-pass cutoffs."""
        assert FrequencyProfile.F40.band == (0.5, 40.0)
        assert FrequencyProfile.F60.band == (0.5, 60.0)
        assert FrequencyProfile.F100.band == (0.5, 100.0)

    def test_cutoff_above_nyquist_rejected(self):
        """Test that a cutoff at or above Nyquist is rejected."""
        with pytest.raises(ValidationError) as exc_info:
            FilterSpec.for_profile(FrequencyProfile.F100).design_sos(150.0)
        assert exc_info.value.code == ErrorCode.VALUE_OUT_OF_RANGE

    def test_notch_needs_rate_above_100hz(self):
        """Test that the 50 Hz notch refuses low sample rates."""
        channels = build_montage(2)
        rec = Recording(channels, 90.0, np.zeros((len(channels), 900)))
        with pytest.raises(ValidationError):
            notch50(rec)


class TestFilterResponse:
    """Test the band-pass and notch responses on synthetic tones."""

    @pytest.mark.parametrize("profile", list(FrequencyProfile))
    def test_dc_attenuated(self, profile):
        """Test that a DC offset is attenuated by at least 20 dB."""
        out = bandpass(_tone_recording(20.0, amplitude=0.0, offset=100.0), profile)
        assert np.abs(_middle(out.samples)).max() < 10.0

    @pytest.mark.parametrize("profile", list(FrequencyProfile))
    def test_passband_flat_at_20hz(self, profile):
        """Test that a 20 Hz tone passes within 1 dB."""
        rec = _tone_recording(20.0)
        out = bandpass(rec, profile)
        gain_db = 20 * np.log10(_rms(_middle(out.samples[0])) / _rms(_middle(rec.samples[0])))
        assert abs(gain_db) <= 1.0

    def test_stopband_80hz_f40(self):
        """Test that an 80 Hz tone is attenuated by at least 20 dB under F40."""
        rec = _tone_recording(80.0)
        out = bandpass(rec, FrequencyProfile.F40)
        gain_db = 20 * np.log10(_rms(_middle(out.samples[0])) / _rms(_middle(rec.samples[0])))
        assert gain_db <= -20.0

    def test_notch_residual(self):
        """Test that a 50 Hz line is suppressed by at least 25 dB."""
        rec = _tone_recording(50.0)
        out = notch50(rec)
        ratio_db = 20 * np.log10(_rms(_middle(out.samples[0])) / _rms(_middle(rec.samples[0])))
        assert ratio_db <= -25.0

    def test_zero_phase(self):
        """Test that a band-limited tone comes out with zero lag."""
        rec = _tone_recording(10.0)
        out = bandpass(rec, FrequencyProfile.F40)
        x = _middle(rec.samples[0]).astype(np.float64)
        y = _middle(out.samples[0])
        lags = range(-20, 21)
        corr = [float(np.dot(x[20:-20], np.roll(y, lag)[20:-20])) for lag in lags]
        assert list(lags)[int(np.argmax(corr))] == 0

    def test_length_and_triggers_preserved(self, noise_recording):
        """Test that filtering keeps the sample count and triggers."""
        out = notch50(bandpass(noise_recording, FrequencyProfile.F60))
        assert out.n_samples == noise_recording.n_samples
        assert out.triggers == noise_recording.triggers


class TestRereference:
    """Test linked-mastoid re-referencing."""

    def test_subtracts_mastoid_mean_from_scalp_only(self, noise_recording):
        """Test that scalp rows lose the mastoid mean and other rows are untouched."""
        out = rereference_linked_mastoids(noise_recording)
        samples = noise_recording.samples.astype(np.float64)
        mastoids = noise_recording.indices(ChannelRole.MASTOID)
        reference = samples[mastoids].mean(axis=0)
        scalp = noise_recording.indices(ChannelRole.SCALP_EEG)
        np.testing.assert_allclose(out.samples[scalp], samples[scalp] - reference)
        others = noise_recording.indices(ChannelRole.EOG) + noise_recording.indices(ChannelRole.ECG) + mastoids
        np.testing.assert_array_equal(out.samples[others], samples[others])

    def test_common_mode_removed(self, small_montage):
        """Test that noise shared by scalp and mastoids cancels."""
        common = np.random.default_rng(1).normal(size=1000)
        samples = np.tile(common, (len(small_montage), 1))
        out = rereference_linked_mastoids(Recording(small_montage, FS, samples))
        np.testing.assert_allclose(out.select(ChannelRole.SCALP_EEG), 0.0, atol=1e-12)

    def test_requires_two_mastoids(self):
        """Test that a montage without two mastoids is rejected."""
        channels = (
            ChannelInfo("Cz", ChannelRole.SCALP_EEG, 0),
            ChannelInfo("M1", ChannelRole.MASTOID, 1),
        )
        with pytest.raises(ValidationError):
            rereference_linked_mastoids(Recording(channels, FS, np.zeros((2, 10))))


def _artifact_session(n_samples: int = 20000, seed: int = 5) -> tuple[Recording, np.ndarray]:
    """Eight mixed super-Gaussian sources, one of them a blink train mirrored on VEOU."""
    rng = np.random.default_rng(seed)
    channels = build_montage(8)
    blink = np.zeros(n_samples)
    onsets = rng.choice(n_samples - 200, size=40, replace=False)
    kernel = np.exp(-0.5 * ((np.arange(200) - 100) / 30.0) ** 2) * 100.0
    for onset in onsets:
        blink[onset : onset + 200] += kernel
    sources = np.vstack([blink, rng.laplace(0.0, 5.0, size=(7, n_samples))])
    mixing = np.eye(8) + 0.3 * rng.normal(size=(8, 8))
    scalp = mixing @ sources

    samples = np.zeros((len(channels), n_samples))
    samples[:8] = scalp
    samples[8:10] = rng.normal(0.0, 1.0, size=(2, n_samples))
    samples[10] = rng.normal(0.0, 1.0, size=n_samples)
    samples[11] = blink + rng.normal(0.0, 1.0, size=n_samples)
    samples[12] = rng.normal(0.0, 1.0, size=n_samples)
    return Recording(channels, FS, samples), blink


class TestIca:
    """Test ICA fitting and artifact rejection."""

    def test_two_source_recovery(self):
        """Test that two mixed sources are recovered up to permutation and sign."""
        n = 10000
        t = np.arange(n) / FS
        s1 = np.sin(2 * np.pi * 7 * t)
        s2 = 2 * ((3 * t) % 1.0) - 1.0
        channels = build_montage(2)
        samples = np.random.default_rng(0).normal(size=(len(channels), n))
        samples[:2] = np.array([[1.0, 0.6], [0.4, 1.0]]) @ np.vstack([s1, s2])
        rec = Recording(channels, FS, samples)

        model = fit_ica(rec, seed=0)
        recovered = model.sources(rec.select(ChannelRole.SCALP_EEG))
        corr = np.abs(np.corrcoef(np.vstack([recovered, s1, s2]))[:2, 2:])
        assert corr.max(axis=0).min() > 0.99
        assert model.converged

    def test_blink_component_rejected(self):
        """Test that the blink component is removed and the scalp decorrelates from VEOU."""
        rec, _ = _artifact_session()
        model = fit_ica(rec, seed=0)
        clean = reject_artifacts(rec, model, threshold=0.95)

        assert len(model.rejected) == 1
        assert model.artifact_scores.max() > 0.95
        veou = clean.samples[11]
        for row in clean.select(ChannelRole.SCALP_EEG):
            assert abs(np.corrcoef(row, veou)[0, 1]) < 0.3

    def test_frozen_model_reapplies_identically(self):
        """Test that applying the frozen model reproduces the offline cleaning."""
        rec, _ = _artifact_session(n_samples=8000)
        model = fit_ica(rec, seed=0)
        offline = reject_artifacts(rec, model)
        np.testing.assert_allclose(apply_ica(rec, model).samples, offline.samples)

    def test_rank_deficient_input(self, caplog):
        """Test that a duplicated channel reduces the component count with a warning."""
        rec, _ = _artifact_session(n_samples=8000)
        samples = np.array(rec.samples, dtype=np.float64)
        samples[7] = samples[6]
        with caplog.at_level(logging.WARNING):
            model = fit_ica(rec.with_samples(samples), seed=0)
        assert model.effective_rank == 7
        assert model.n_components == 7
        assert "rank deficient" in caplog.text

    def test_too_few_samples(self):
        """Test that a session shorter than ten samples per channel is refused."""
        with pytest.raises(ValidationError):
            fit_ica(make_recording(n_samples=50))

    def test_save_and_load(self, tmp_path):
        """Test that a saved model reloads with identical arrays and mask."""
        rec, _ = _artifact_session(n_samples=8000)
        model = fit_ica(rec, seed=0)
        reject_artifacts(rec, model)
        path = tmp_path / "ica.npz"
        save_ica(model, path)
        loaded = load_ica(path)
        np.testing.assert_array_equal(loaded.unmixing, model.unmixing)
        np.testing.assert_array_equal(loaded.component_mask, model.component_mask)
        assert loaded.effective_rank == model.effective_rank


class TestPreprocessChain:
    """Test the shared offline/online chain."""

    def test_fit_then_run_matches(self, mi_session):
        """Test that the online path with the frozen model equals the offline result."""
        chain = PreprocessChain(profile=FrequencyProfile.F40)
        offline = chain.fit(mi_session)
        assert chain.ica_model is not None
        np.testing.assert_allclose(chain.run(mi_session).samples, offline.samples)

    def test_without_ica(self, noise_recording):
        """Test that disabling ICA leaves only the linear stages."""
        chain = PreprocessChain(use_ica=False)
        out = chain.fit(noise_recording)
        assert chain.ica_model is None
        np.testing.assert_allclose(out.samples, chain.filter(noise_recording).samples)

    def test_from_dict_and_provenance(self):
        """Test building from a config section and the echoed filter specs."""
        chain = PreprocessChain.from_dict({"profile": "F60", "notch": True, "ica": False}, FrequencyProfile.F100)
        info = chain.provenance()
        assert info["profile"] == "F100"
        assert [f["kind"] for f in info["filters"]] == ["BandPass", "Notch"]
        assert "ica" not in info
