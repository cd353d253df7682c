"""
Decoder datasets and trial-granular stratified splitting.

A dataset row is one analysis window: a DE feature vector or, for the CNN,
the time-domain scalp window. ``trial_ids`` keeps windows of one trial together
when splitting so no trial contributes to both train and test.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from core.errors import ErrorCode, ValidationError
from core.recording import ClassLabel, Epoch, Task

from ..features.extract import extract_features, window_tensor
from ..preprocess.filters import FrequencyProfile

logger = logging.getLogger(__name__)


class Representation(Enum):
    DE = "DE"
    TIME = "Time"


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: tuple[ClassLabel, ...]
    task: Task
    profile: FrequencyProfile
    trial_ids: np.ndarray
    representation: Representation = Representation.DE

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "trial_ids", np.asarray(self.trial_ids, dtype=np.int64))
        if self.features.shape[0] != len(self.labels) or len(self.labels) != self.trial_ids.size:
            raise ValidationError(
                code=ErrorCode.DIMENSION_MISMATCH,
                user_message=f"{self.features.shape[0]} rows, {len(self.labels)} labels, {self.trial_ids.size} trial ids",
                field="labels",
            )
        if any(label.task is not self.task for label in self.labels):
            raise ValidationError(
                code=ErrorCode.INVALID_INPUT, user_message=f"All labels must belong to task {self.task.value}", field="labels"
            )

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def y(self) -> np.ndarray:
        return np.array([label.value for label in self.labels], dtype=np.int64)

    @property
    def n_classes(self) -> int:
        return self.task.n_classes

    @property
    def input_shape(self) -> tuple[int, ...]:
        return tuple(int(s) for s in self.features.shape[1:])

    def trials(self) -> list[int]:
        return sorted(set(self.trial_ids.tolist()))

    def subset_trials(self, trial_ids: list[int] | np.ndarray) -> Dataset:
        """Rows whose trial id is in ``trial_ids``, in original order."""
        mask = np.isin(self.trial_ids, np.asarray(trial_ids))
        return Dataset(
            features=self.features[mask],
            labels=tuple(label for label, keep in zip(self.labels, mask, strict=True) if keep),
            task=self.task,
            profile=self.profile,
            trial_ids=self.trial_ids[mask],
            representation=self.representation,
        )


def build_dataset(
    epochs: list[Epoch], profile: FrequencyProfile, representation: Representation = Representation.DE
) -> Dataset:
    """
    Window every epoch and stack the rows.

    Raises:
        ValidationError: If there are no epochs
    """
    if not epochs:
        raise ValidationError(code=ErrorCode.EMPTY_INPUT, user_message="Cannot build a dataset from zero epochs")
    rows: list[np.ndarray] = []
    labels: list[ClassLabel] = []
    trial_ids: list[int] = []
    for ep in epochs:
        if representation is Representation.DE:
            windows = [fv.values for fv in extract_features(ep, profile)]
        else:
            windows = list(window_tensor(ep))
        rows.extend(windows)
        labels.extend([ep.label] * len(windows))
        trial_ids.extend([ep.trial_id] * len(windows))
    ds = Dataset(np.stack(rows), tuple(labels), epochs[0].label.task, profile, np.array(trial_ids), representation)
    logger.info(f"Built {representation.value} dataset: {len(ds)} windows from {len(epochs)} trials, shape {ds.input_shape}")
    return ds


def split_trials(ds: Dataset, test_fraction: float = 0.2, seed: int = 0) -> tuple[list[int], list[int]]:
    """
    Choose train and test trial ids class by class.

    Each class contributes ``round(test_fraction * n_trials)`` test trials,
    clamped to leave at least one trial on each side.

    Raises:
        ValidationError: If a class has fewer than two trials or the fraction is outside (0, 1)
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValidationError(
            code=ErrorCode.VALUE_OUT_OF_RANGE, user_message="test_fraction must be in (0, 1)", field="test_fraction"
        )
    rng = np.random.default_rng(seed)
    trial_class: dict[int, int] = {}
    for trial, label in zip(ds.trial_ids.tolist(), ds.labels, strict=True):
        trial_class[trial] = label.value

    train: list[int] = []
    test: list[int] = []
    for cls in range(ds.n_classes):
        trials = np.array(sorted(t for t, c in trial_class.items() if c == cls), dtype=np.int64)
        if trials.size < 2:
            raise ValidationError(
                code=ErrorCode.VALUE_OUT_OF_RANGE,
                user_message=f"Class {ClassLabel(ds.task, cls).name} has {trials.size} trials; at least 2 are required",
                field="labels",
            )
        n_test = min(max(round(test_fraction * trials.size), 1), trials.size - 1)
        shuffled = rng.permutation(trials)
        test.extend(shuffled[:n_test].tolist())
        train.extend(shuffled[n_test:].tolist())
    return sorted(train), sorted(test)


def stratified_split(ds: Dataset, test_fraction: float = 0.2, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Trial-granular stratified split into (train, test) datasets."""
    train_ids, test_ids = split_trials(ds, test_fraction, seed)
    logger.debug(f"Split {len(train_ids)} train / {len(test_ids)} test trials (seed {seed})")
    return ds.subset_trials(train_ids), ds.subset_trials(test_ids)
