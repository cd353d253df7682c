"""
Task decoders used online.

``ModelDecoder`` runs a frozen offline model on a task buffer: the offline
preprocessing chain (ICA reused, never refitted) over the whole buffer, the
decode crop, 500 ms windows and per-window prediction. ``SimulatedDecoder``
ignores the signal and is right with a fixed probability; it stands in for
trained models in oracle runs and Monte-Carlo checks.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from core.errors import ErrorCode, PipelineError, ValidationError
from core.recording import ChannelRole, ClassLabel, Recording, Task

from ..decoders import DecoderModel, Representation, predict_batch
from ..features import bands_for_profile, extract_window_features, window_segment
from ..preprocess import PreprocessChain
from .aggregation import WindowVote

logger = logging.getLogger(__name__)

ONLINE_WINDOWS = 20


@dataclass(frozen=True)
class DecodeResult:
    votes: list[WindowVote]
    data_proc_s: float = 0.0
    infer_s: float = 0.0


class TaskDecoder(Protocol):
    task: Task

    def decode(self, buffer: Recording, crop: tuple[int, int], truth: ClassLabel | None) -> DecodeResult: ...


class ModelDecoder:
    """
    Zero-shot decoder around a trained model; the model is only read.

    Raises:
        PipelineError: If the chain's frequency profile differs from the model's
    """

    def __init__(self, model: DecoderModel, chain: PreprocessChain) -> None:
        if chain.profile is not model.profile:
            raise PipelineError(
                code=ErrorCode.PROFILE_MISMATCH,
                user_message=f"{model.task.value} model was trained on {model.profile.value}, "
                f"preprocessing runs {chain.profile.value}",
            )
        if chain.use_ica and chain.ica_model is None:
            logger.warning(f"No ICA model supplied for the {model.task.value} decoder; artifact rejection skipped")
        self.model = model
        self.chain = chain
        self.task = model.task

    def decode(self, buffer: Recording, crop: tuple[int, int], truth: ClassLabel | None = None) -> DecodeResult:
        start, stop = crop
        if buffer.n_samples < stop:
            raise PipelineError(
                code=ErrorCode.TRIAL_ABORTED,
                user_message=f"{self.task.value} buffer has {buffer.n_samples} samples, decode crop ends at {stop}",
            )
        t0 = time.perf_counter()
        clean = self.chain.run(buffer)
        scalp = np.asarray(clean.select(ChannelRole.SCALP_EEG)[:, start:stop], dtype=np.float64)
        windows = window_segment(scalp, buffer.sample_rate_hz)
        if self.model.feature_spec.representation is Representation.DE:
            bands = bands_for_profile(self.model.profile)
            x = np.stack([extract_window_features(win, bands) for win in windows])
        else:
            x = np.stack([win.data for win in windows])
        t1 = time.perf_counter()
        labels, scores = predict_batch(self.model, x)
        t2 = time.perf_counter()
        votes = [(int(label), row) for label, row in zip(labels, scores)]
        return DecodeResult(votes, data_proc_s=t1 - t0, infer_s=t2 - t1)


class SimulatedDecoder:
    """Correct with probability ``accuracy``; otherwise a uniformly chosen wrong label."""

    def __init__(self, task: Task, accuracy: float, seed: int = 0, n_windows: int = ONLINE_WINDOWS) -> None:
        if not 0.0 <= accuracy <= 1.0:
            raise ValidationError(
                code=ErrorCode.VALUE_OUT_OF_RANGE, user_message=f"Decoder accuracy must lie in [0, 1], got {accuracy}", field="accuracy"
            )
        self.task = task
        self.accuracy = accuracy
        self.n_windows = n_windows
        self._rng = np.random.default_rng(seed)

    def choose(self, truth: ClassLabel) -> ClassLabel:
        k = self.task.n_classes
        if self._rng.random() < self.accuracy:
            return truth
        other = int(self._rng.integers(k - 1))
        return ClassLabel(self.task, other if other < truth.value else other + 1)

    def decode(self, buffer: Recording | None, crop: tuple[int, int], truth: ClassLabel | None) -> DecodeResult:
        if truth is None:
            raise ValidationError(
                code=ErrorCode.MISSING_LABEL, user_message="Simulated decoding needs the scripted label", field="truth"
            )
        label = self.choose(truth)
        scores = np.zeros(self.task.n_classes)
        scores[label.value] = 1.0
        return DecodeResult([(label.value, scores)] * self.n_windows)
