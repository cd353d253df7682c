"""
Class signatures: per-class band-power modulation over the scalp channels.

Motor imagery desynchronizes the mu/beta rhythm over the hemisphere opposite
the imagined hand. Visual imagery uses three fixed random spatial patterns
that raise or lower alpha and gamma power. Modulation depth grows linearly
with separability, up to a 40% power change.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from core.recording import ChannelInfo, ClassLabel, MiClass, Task

MODULATION_DEPTH = 0.4

# Carrier rhythms present on every scalp channel: (low Hz, high Hz, amplitude uV)
CARRIERS: dict[str, tuple[float, float, float]] = {
    "alpha": (8.0, 13.0, 6.0),
    "beta": (13.0, 30.0, 4.0),
    "gamma": (30.0, 40.0, 2.0),
}

_TRAILING_DIGIT = re.compile(r"(\d+)$")


@dataclass(frozen=True)
class ClassSignature:
    label: ClassLabel
    power_gain: dict[str, np.ndarray]
    evoked_weights: np.ndarray

    def amplitude_gain(self, carrier: str) -> np.ndarray:
        return np.sqrt(self.power_gain[carrier])


def lateral_groups(scalp: tuple[ChannelInfo, ...] | list[ChannelInfo]) -> tuple[np.ndarray, np.ndarray]:
    """
    Positions of left- and right-hemisphere channels within the scalp list.

    10-20 names with an odd trailing number sit on the left, even on the right.
    When naming gives an empty side the list is split in halves instead.
    """
    left: list[int] = []
    right: list[int] = []
    for pos, ch in enumerate(scalp):
        match = _TRAILING_DIGIT.search(ch.name)
        if match and not ch.name.startswith("E"):
            (left if int(match.group(1)) % 2 else right).append(pos)
    if not left or not right:
        half = len(scalp) // 2
        left = list(range(half))
        right = list(range(len(scalp) - half, len(scalp)))
    return np.array(left, dtype=np.int64), np.array(right, dtype=np.int64)


def class_signatures(
    task: Task, scalp: tuple[ChannelInfo, ...] | list[ChannelInfo], separability: float, signature_seed: int
) -> tuple[ClassSignature, ...]:
    """
    One signature per class of ``task``, indexed by class value.

    At separability 0 every gain is exactly 1 and every evoked weight equal, so
    the classes are indistinguishable.
    """
    n = len(scalp)
    depth = MODULATION_DEPTH * separability
    rng = np.random.default_rng(signature_seed)
    signatures: list[ClassSignature] = []

    if task is Task.MI:
        left, right = lateral_groups(scalp)
        for value in MiClass:
            gains = {name: np.ones(n) for name in CARRIERS}
            contralateral = right if value is MiClass.LEFT else left
            for name in ("alpha", "beta"):
                gains[name][contralateral] = 1.0 - depth
            signatures.append(ClassSignature(ClassLabel.mi(value), gains, np.zeros(n)))
        return tuple(signatures)

    patterns = rng.uniform(size=(task.n_classes, n))
    for value in range(task.n_classes):
        gains = {name: np.ones(n) for name in CARRIERS}
        for name in ("alpha", "gamma"):
            gains[name] = 1.0 + depth * (2.0 * patterns[value] - 1.0)
        signatures.append(ClassSignature(ClassLabel.vi(value), gains, 0.5 + separability * (patterns[value] - 0.5)))
    return tuple(signatures)
