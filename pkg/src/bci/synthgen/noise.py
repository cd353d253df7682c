"""
Noise sources for synthetic EEG.

Both generators shape white Gaussian noise in the frequency domain and return
rows scaled to unit standard deviation.
"""

from __future__ import annotations

import numpy as np


def _unit_rows(x: np.ndarray) -> np.ndarray:
    std = x.std(axis=1, keepdims=True)
    return x / np.where(std > 0, std, 1.0)


def pink_noise(n: int, alpha: float, rng: np.random.Generator, n_channels: int = 1) -> np.ndarray:
    """
    ``1/f^alpha`` noise, ``[n_channels × n]``.

    The power spectrum falls as ``f^-alpha``, so amplitudes are scaled by
    ``f^(-alpha/2)``; the DC bin is removed.
    """
    white = rng.standard_normal((n_channels, n))
    freqs = np.fft.rfftfreq(n)
    scale = np.zeros_like(freqs)
    scale[1:] = freqs[1:] ** (-alpha / 2.0)
    shaped = np.fft.irfft(np.fft.rfft(white, axis=1) * scale, n=n, axis=1)
    return _unit_rows(shaped)


def band_noise(n: int, lo_hz: float, hi_hz: float, fs: float, rng: np.random.Generator, n_channels: int = 1) -> np.ndarray:
    """Gaussian noise restricted to ``[lo_hz, hi_hz]``, ``[n_channels × n]``."""
    white = rng.standard_normal((n_channels, n))
    freqs = np.fft.rfftfreq(n, d=1.0 / fs)
    mask = (freqs >= lo_hz) & (freqs <= hi_hz)
    shaped = np.fft.irfft(np.fft.rfft(white, axis=1) * mask, n=n, axis=1)
    return _unit_rows(shaped)


def pulse_train(n: int, onsets: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Sum of ``kernel`` copies centred on each onset sample."""
    impulses = np.zeros(n)
    np.add.at(impulses, np.asarray(onsets, dtype=np.int64), 1.0)
    return np.convolve(impulses, kernel, mode="same")


def gaussian_kernel(sigma_samples: float) -> np.ndarray:
    half = max(1, int(round(4 * sigma_samples)))
    t = np.arange(-half, half + 1, dtype=np.float64)
    return np.exp(-0.5 * (t / sigma_samples) ** 2)
