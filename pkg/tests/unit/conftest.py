"""
Shared fixtures for the unit tests.

Most tests run on an 8-electrode scalp montage (13 channels with the mastoid,
EOG and ECG channels) and short sessions; the default 59-electrode montage is
only used where its arithmetic is the subject of the test.
"""

from __future__ import annotations

import numpy as np
import pytest

from bci.synthgen import SynthConfig, generate_session
from core.recording import ChannelInfo, ClassLabel, Recording, Task, TriggerCode, TriggerEvent, build_montage

SMALL_SCALP = 8


def make_recording(
    n_samples: int = 2000,
    n_scalp: int = SMALL_SCALP,
    fs: float = 1000.0,
    seed: int = 0,
    triggers: tuple[TriggerEvent, ...] = (),
) -> Recording:
    """Gaussian noise recording on a reduced montage."""
    channels = build_montage(n_scalp)
    rng = np.random.default_rng(seed)
    samples = rng.normal(0.0, 10.0, size=(len(channels), n_samples)).astype(np.float32)
    return Recording(channels, fs, samples, triggers)


def task_triggers(task: Task, label: ClassLabel, start: int, length: int) -> tuple[TriggerEvent, TriggerEvent]:
    """Start/end trigger pair of one online task window."""
    if task is Task.VI:
        return TriggerEvent(TriggerCode.TASK_VI_START, start, label), TriggerEvent(TriggerCode.TASK_VI_END, start + length)
    return TriggerEvent(TriggerCode.TASK_MI_START, start, label), TriggerEvent(TriggerCode.TASK_MI_END, start + length)


@pytest.fixture
def small_montage() -> tuple[ChannelInfo, ...]:
    """Reduced montage: 8 scalp, 2 mastoid, 2 EOG, 1 ECG."""
    return build_montage(SMALL_SCALP)


@pytest.fixture
def noise_recording() -> Recording:
    """Two seconds of noise on the reduced montage."""
    return make_recording()


@pytest.fixture
def mi_session() -> Recording:
    """Short, fully separable MI session on the reduced montage."""
    return generate_session(SynthConfig(task=Task.MI, n_trials=6, separability=1.0, seed=3, n_scalp=SMALL_SCALP))


@pytest.fixture
def vi_session() -> Recording:
    """Short, fully separable VI session on the reduced montage."""
    return generate_session(SynthConfig(task=Task.VI, n_trials=6, separability=1.0, seed=4, n_scalp=SMALL_SCALP))
