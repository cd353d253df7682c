"""
Labelled synthetic EEG sessions.

Each scalp channel carries 1/f background, white sensor noise and three
band-limited carrier rhythms (alpha, beta, gamma). During a labelled span the
carriers of the trial's class are amplitude-scaled by its signature. Mastoid
channels share a common-mode reference noise with the scalp, the vertical EOG
channel carries blinks that leak frontally with a known mixing, and the ECG
channel carries a heartbeat pulse train with a small scalp leakage.

Generation is sample-accurate: trigger spacing equals the configured phase
durations exactly, and the same config gives a bit-identical recording.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from core.errors import ErrorCode, ValidationError
from core.recording import (
    ChannelRole,
    ClassLabel,
    Recording,
    Task,
    TriggerCode,
    TriggerEvent,
    build_montage,
)

from .config import OnlineTiming, SynthConfig
from .noise import band_noise, gaussian_kernel, pink_noise, pulse_train
from .signatures import CARRIERS, ClassSignature, class_signatures

logger = logging.getLogger(__name__)

BACKGROUND_UV = 6.0
WHITE_UV = 0.5
COMMON_MODE_UV = 4.0
LINE_NOISE_UV = 2.0
LINE_HZ = 50.0

BLINK_RATE_HZ = 0.2
BLINK_UV = 100.0
BLINK_SIGMA_S = 0.05
BLINK_SCALP_GAIN = 0.4

HEART_RATE_BPM = 72.0
ECG_UV = 800.0
ECG_SIGMA_S = 0.01
ECG_LEAKAGE = 0.003

EVOKED_UV = 5.0
EVOKED_LATENCY_S = 0.3
EVOKED_SIGMA_S = 0.06

# Ramp applied at both edges of a modulated span
RAMP_S = 0.05
# Unlabelled padding before the first and after the last trial
PAD_S = 1.0


def blink_mixing(n_scalp: int) -> np.ndarray:
    """Scalp weights of the blink source; frontal (low-index) channels dominate."""
    return BLINK_SCALP_GAIN * np.exp(-np.arange(n_scalp) / 8.0)


def ecg_mixing(n_scalp: int, signature_seed: int) -> np.ndarray:
    rng = np.random.default_rng(signature_seed + 1)
    return ECG_LEAKAGE * rng.uniform(0.5, 1.5, size=n_scalp)


@dataclass(frozen=True)
class _Span:
    start: int
    stop: int
    signature: ClassSignature
    evoked: bool


class _SessionRenderer:
    """
    Renders a whole session in one pass.

    Background, artifacts and carriers are drawn once over the full length and
    class signatures modulate the carriers inside each span, so the background
    runs on across trial boundaries.
    """

    def __init__(self, cfg: SynthConfig) -> None:
        self.cfg = cfg
        self.fs = cfg.sample_rate_hz
        self.channels = build_montage(cfg.n_scalp)
        self.rng = np.random.default_rng(cfg.seed)
        roles = [ch.role for ch in self.channels]
        self.scalp = [i for i, r in enumerate(roles) if r is ChannelRole.SCALP_EEG]
        self.mastoid = [i for i, r in enumerate(roles) if r is ChannelRole.MASTOID]
        eog = [i for i, r in enumerate(roles) if r is ChannelRole.EOG]
        self.heog, self.veog = eog[0], eog[1]
        self.ecg = next(i for i, r in enumerate(roles) if r is ChannelRole.ECG)
        self.blink_mix = blink_mixing(len(self.scalp))
        self.ecg_mix = ecg_mixing(len(self.scalp), cfg.signature_seed)
        self.beat_period = round(self.fs * 60.0 / HEART_RATE_BPM)

    def signatures(self, task: Task) -> tuple[ClassSignature, ...]:
        scalp = tuple(self.channels[i] for i in self.scalp)
        return class_signatures(task, scalp, self.cfg.separability, self.cfg.signature_seed)

    def render(self, n: int, spans: list[_Span]) -> np.ndarray:
        """The ``[channels × n]`` float64 session; span indices are absolute samples."""
        rng = self.rng
        fs = self.fs
        n_scalp = len(self.scalp)
        out = np.zeros((len(self.channels), n))

        scalp = BACKGROUND_UV * pink_noise(n, self.cfg.alpha, rng, n_scalp)
        scalp += WHITE_UV * rng.standard_normal((n_scalp, n))
        ramp = max(1, round(RAMP_S * fs))
        for name, (lo, hi, amplitude) in CARRIERS.items():
            carrier = amplitude * band_noise(n, lo, hi, fs, rng, n_scalp)
            for span in spans:
                gain = span.signature.amplitude_gain(name)
                if np.all(gain == 1.0):
                    continue
                envelope = _envelope(span.stop - span.start, ramp)
                carrier[:, span.start : span.stop] *= 1.0 + (gain[:, None] - 1.0) * envelope[None, :]
            scalp += carrier

        if self.cfg.evoked_component:
            kernel = gaussian_kernel(EVOKED_SIGMA_S * fs)
            latency = round(EVOKED_LATENCY_S * fs)
            for span in spans:
                if span.evoked and span.start + latency < n:
                    wave = EVOKED_UV * pulse_train(n, np.array([span.start + latency]), kernel)
                    scalp += span.signature.evoked_weights[:, None] * wave[None, :]

        t = np.arange(n) / fs
        common = COMMON_MODE_UV * pink_noise(n, self.cfg.alpha, rng)[0]
        common += LINE_NOISE_UV * np.sin(2 * np.pi * LINE_HZ * t)

        n_blinks = int(rng.poisson(BLINK_RATE_HZ * n / fs))
        blinks = BLINK_UV * pulse_train(n, rng.integers(0, n, size=n_blinks), gaussian_kernel(BLINK_SIGMA_S * fs))

        beats = np.arange(int(rng.integers(0, self.beat_period)), n, self.beat_period)
        heart = ECG_UV * pulse_train(n, beats, gaussian_kernel(ECG_SIGMA_S * fs))

        scalp += common[None, :] + self.blink_mix[:, None] * blinks[None, :] + self.ecg_mix[:, None] * heart[None, :]
        out[self.scalp] = scalp
        for row in self.mastoid:
            out[row] = common + 0.3 * BACKGROUND_UV * pink_noise(n, self.cfg.alpha, rng)[0] + WHITE_UV * rng.standard_normal(n)
        out[self.veog] = blinks + 2.0 * rng.standard_normal(n)
        out[self.heog] = 0.2 * blinks + 2.0 * rng.standard_normal(n)
        out[self.ecg] = heart + 5.0 * rng.standard_normal(n)
        return out


def _envelope(length: int, ramp: int) -> np.ndarray:
    env = np.ones(length)
    ramp = min(ramp, length // 2)
    if ramp > 0:
        edge = 0.5 - 0.5 * np.cos(np.pi * np.arange(ramp) / ramp)
        env[:ramp] = edge
        env[length - ramp :] = edge[::-1]
    return env


def balanced_labels(n_trials: int, n_classes: int, rng: np.random.Generator) -> np.ndarray:
    """Class indices with counts differing by at most one, randomly intermixed."""
    labels = np.arange(n_trials) % n_classes
    extra = n_trials % n_classes
    if extra:
        # Spread the remainder over random classes instead of always the first
        remap = rng.permutation(n_classes)
        labels = remap[labels]
    return rng.permutation(labels)


def generate_session(cfg: SynthConfig) -> Recording:
    """
    Generate an offline VI or MI session.

    Each trial is fixation, stimulus (VI picture or MI arrow cue), imagery and a
    rest, marked by ``FixationOn``, ``StimulusOn``/``CueLeft``/``CueRight``,
    ``ImageryStart``, ``ImageryEnd`` and ``TrialEnd``. Stimulus, cue and imagery
    triggers carry the class label. VI signatures are active from stimulus
    onset to imagery end; MI signatures during imagery only.

    Args:
        cfg: Session settings

    Returns:
        Float32 recording on the montage ``build_montage(cfg.n_scalp)``
    """
    renderer = _SessionRenderer(cfg)
    signatures = renderer.signatures(cfg.task)
    labels = balanced_labels(cfg.n_trials, cfg.task.n_classes, renderer.rng)
    fix, stim, imag, post = cfg.timing.samples(renderer.fs)
    trial_len = fix + stim + imag + post
    pad = round(PAD_S * renderer.fs)

    spans: list[_Span] = []
    triggers: list[TriggerEvent] = []
    for trial, value in enumerate(labels):
        t0 = pad + trial * trial_len
        signature = signatures[int(value)]
        label = signature.label
        if cfg.task is Task.VI:
            stim_code = TriggerCode.STIMULUS_ON
            spans.append(_Span(t0 + fix, t0 + fix + stim + imag, signature, evoked=True))
        else:
            stim_code = TriggerCode.CUE_LEFT if int(value) == 0 else TriggerCode.CUE_RIGHT
            spans.append(_Span(t0 + fix + stim, t0 + fix + stim + imag, signature, evoked=False))
        triggers += [
            TriggerEvent(TriggerCode.FIXATION_ON, t0),
            TriggerEvent(stim_code, t0 + fix, label),
            TriggerEvent(TriggerCode.IMAGERY_START, t0 + fix + stim, label),
            TriggerEvent(TriggerCode.IMAGERY_END, t0 + fix + stim + imag),
            TriggerEvent(TriggerCode.TRIAL_END, t0 + trial_len),
        ]

    samples = renderer.render(2 * pad + cfg.n_trials * trial_len, spans).astype(np.float32)
    rec = Recording(renderer.channels, renderer.fs, samples, tuple(triggers))
    logger.info(
        f"Generated {cfg.task.value} session: {cfg.n_trials} trials, separability {cfg.separability}, "
        f"{rec.duration_seconds:.1f} s, seed {cfg.seed}"
    )
    return rec


def generate_online_stream_script(
    cfg: SynthConfig, truth: list[tuple[ClassLabel, ClassLabel]], timing: OnlineTiming | None = None
) -> Recording:
    """
    Generate the continuous recording of an online run.

    Each trial is a ``Beep``, then a VI task window (``TaskViStart`` carrying the
    VI label, ``TaskViEnd`` 15 s later), a short gap, and an MI task window
    (``TaskMiStart`` with the MI label, ``TaskMiEnd`` 15 s later). The matching
    class signature is active over each whole task window.

    Args:
        cfg: Session settings; ``task`` and ``n_trials`` are ignored
        truth: Intended (VI, MI) labels per trial
        timing: Online trial layout

    Raises:
        ValidationError: If ``truth`` is empty or holds labels of the wrong task
    """
    if not truth:
        raise ValidationError(code=ErrorCode.EMPTY_INPUT, user_message="Online script needs at least one trial", field="truth")
    for vi, mi in truth:
        if vi.task is not Task.VI or mi.task is not Task.MI:
            raise ValidationError(
                code=ErrorCode.INVALID_INPUT, user_message=f"Expected (VI, MI) label pairs, got ({vi}, {mi})", field="truth"
            )
    timing = timing or OnlineTiming()
    renderer = _SessionRenderer(cfg)
    vi_signatures = renderer.signatures(Task.VI)
    mi_signatures = renderer.signatures(Task.MI)
    fs = renderer.fs
    lead, task_len, gap, rest = (round(s * fs) for s in (timing.lead_s, timing.task_s, timing.gap_s, timing.rest_s))
    trial_len = lead + task_len + gap + task_len + rest

    spans: list[_Span] = []
    triggers: list[TriggerEvent] = []
    for trial, (vi, mi) in enumerate(truth):
        t0 = trial * trial_len
        vi_start = t0 + lead
        mi_start = t0 + lead + task_len + gap
        triggers += [
            TriggerEvent(TriggerCode.BEEP, t0),
            TriggerEvent(TriggerCode.TASK_VI_START, vi_start, vi),
            TriggerEvent(TriggerCode.TASK_VI_END, vi_start + task_len),
            TriggerEvent(TriggerCode.TASK_MI_START, mi_start, mi),
            TriggerEvent(TriggerCode.TASK_MI_END, mi_start + task_len),
        ]
        spans += [
            _Span(vi_start, vi_start + task_len, vi_signatures[vi.value], evoked=True),
            _Span(mi_start, mi_start + task_len, mi_signatures[mi.value], evoked=False),
        ]

    samples = renderer.render(len(truth) * trial_len, spans).astype(np.float32)
    rec = Recording(renderer.channels, fs, samples, tuple(triggers))
    logger.info(f"Generated online script: {len(truth)} trials, {rec.duration_seconds:.1f} s, seed {cfg.seed}")
    return rec
