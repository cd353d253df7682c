"""
Domain types shared by every stage of the imagery BCI system.

A ``Recording`` is the unit of storage and streaming: a channel-major sample
matrix in microvolts, the montage describing each row, and the ordered trigger
markers that delimit paradigm phases. ``Epoch`` is one trial's phase slice.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum, IntEnum

import numpy as np

from .errors import ErrorCode, ValidationError

DEFAULT_SAMPLE_RATE_HZ = 1000.0


class ChannelRole(Enum):
    """Electrode role within the montage."""

    SCALP_EEG = "ScalpEeg"
    MASTOID = "Mastoid"
    EOG = "Eog"
    ECG = "Ecg"


class TriggerCode(IntEnum):
    """Phase trigger codes; the integer values are the on-disk and on-wire encoding."""

    FIXATION_ON = 1
    STIMULUS_ON = 2
    IMAGERY_START = 3
    IMAGERY_END = 4
    CUE_LEFT = 5
    CUE_RIGHT = 6
    TRIAL_END = 7
    TASK_VI_START = 8
    TASK_VI_END = 9
    TASK_MI_START = 10
    TASK_MI_END = 11
    BEEP = 12


class Task(Enum):
    """Imagery task: visual imagery selects the object, motor imagery the side."""

    VI = "VI"
    MI = "MI"

    @property
    def n_classes(self) -> int:
        return 3 if self is Task.VI else 2

    @property
    def chance_level(self) -> float:
        return 1.0 / self.n_classes


class Phase(Enum):
    """Trial phase selector for epoching."""

    PERCEPTION = "Perception"
    IMAGERY = "Imagery"


class ViClass(IntEnum):
    APPLE = 0
    BANANA = 1
    ORANGE = 2


class MiClass(IntEnum):
    LEFT = 0
    RIGHT = 1


@dataclass(frozen=True)
class ClassLabel:
    """Class label scoped to a task; ``value`` indexes ViClass or MiClass."""

    task: Task
    value: int

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.task.n_classes:
            raise ValidationError(
                code=ErrorCode.VALUE_OUT_OF_RANGE,
                user_message=f"Label value {self.value} out of range for task {self.task.value}",
                field="value",
            )

    @property
    def name(self) -> str:
        enum_type: type[IntEnum] = ViClass if self.task is Task.VI else MiClass
        return enum_type(self.value).name.title()

    @classmethod
    def vi(cls, value: int) -> ClassLabel:
        return cls(Task.VI, int(value))

    @classmethod
    def mi(cls, value: int) -> ClassLabel:
        return cls(Task.MI, int(value))

    def __str__(self) -> str:
        return f"{self.task.value}:{self.name}"


@dataclass(frozen=True)
class ChannelInfo:
    name: str
    role: ChannelRole
    index: int


@dataclass(frozen=True)
class TriggerEvent:
    code: TriggerCode
    sample_index: int
    label: ClassLabel | None = None


# 10-20 style names for the default 59-electrode scalp layout
_SCALP_NAMES_59 = (
    "Fp1 Fpz Fp2 AF3 AF4 F7 F5 F3 F1 Fz F2 F4 F6 F8 FT7 FC5 FC3 FC1 FCz FC2 FC4 FC6 FT8 "
    "T7 C5 C3 C1 Cz C2 C4 C6 T8 TP7 CP5 CP3 CP1 CPz CP2 CP4 CP6 TP8 P7 P5 P3 P1 Pz P2 P4 "
    "P6 P8 PO7 PO5 PO3 POz PO4 PO6 PO8 O1 Oz"
).split()


def build_montage(n_scalp: int = 59) -> tuple[ChannelInfo, ...]:
    """
    Build a montage of ``n_scalp`` scalp electrodes plus 2 mastoid, 2 EOG and 1 ECG channel.

    The default 59-electrode montage totals 64 channels. Reduced montages keep the
    auxiliary channels so preprocessing and feature extraction behave identically.

    Args:
        n_scalp: Number of scalp EEG electrodes (at least 2)

    Returns:
        Channel descriptors with contiguous indices from 0
    """
    if n_scalp < 2:
        raise ValidationError(
            code=ErrorCode.VALUE_OUT_OF_RANGE, user_message="A montage needs at least 2 scalp channels", field="n_scalp"
        )
    if n_scalp <= len(_SCALP_NAMES_59):
        scalp_names = _SCALP_NAMES_59[:n_scalp]
    else:
        scalp_names = [f"E{i + 1}" for i in range(n_scalp)]
    roles = [(name, ChannelRole.SCALP_EEG) for name in scalp_names]
    roles += [
        ("M1", ChannelRole.MASTOID),
        ("M2", ChannelRole.MASTOID),
        ("HEOL", ChannelRole.EOG),
        ("VEOU", ChannelRole.EOG),
        ("ECG", ChannelRole.ECG),
    ]
    return tuple(ChannelInfo(name=name, role=role, index=i) for i, (name, role) in enumerate(roles))


def default_montage() -> tuple[ChannelInfo, ...]:
    """The 64-channel acquisition montage: 59 scalp, 2 mastoid, 2 EOG, 1 ECG."""
    return build_montage(59)


def role_counts(channels: tuple[ChannelInfo, ...] | list[ChannelInfo]) -> dict[ChannelRole, int]:
    counts = Counter(ch.role for ch in channels)
    return {role: counts.get(role, 0) for role in ChannelRole}


@dataclass(frozen=True)
class Recording:
    """
    Multichannel recording with montage, sample rate and trigger markers.

    Instances are immutable after construction; ``samples`` is made read-only so
    a recording can be shared across threads.
    """

    channels: tuple[ChannelInfo, ...]
    sample_rate_hz: float
    samples: np.ndarray
    triggers: tuple[TriggerEvent, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(self, "triggers", tuple(self.triggers))
        samples = np.asarray(self.samples)
        if samples.ndim != 2:
            raise ValidationError(
                code=ErrorCode.DIMENSION_MISMATCH, user_message="Sample matrix must be 2-D", field="samples"
            )
        # Read-only view; the caller's array keeps its own flags
        samples = samples.view()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        self.validate()

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    @property
    def n_samples(self) -> int:
        return int(self.samples.shape[1])

    @property
    def duration_seconds(self) -> float:
        return self.n_samples / self.sample_rate_hz

    def validate(self) -> None:
        """
        Check the recording invariants.

        Raises:
            ValidationError: If any invariant is violated
        """
        if self.sample_rate_hz <= 0:
            raise ValidationError(
                code=ErrorCode.VALUE_OUT_OF_RANGE, user_message="Sample rate must be positive", field="sample_rate_hz"
            )
        if self.samples.shape[0] != len(self.channels):
            raise ValidationError(
                code=ErrorCode.DIMENSION_MISMATCH,
                user_message=f"Matrix has {self.samples.shape[0]} rows but montage has {len(self.channels)} channels",
                field="samples",
            )
        if [ch.index for ch in self.channels] != list(range(len(self.channels))):
            raise ValidationError(
                code=ErrorCode.INVALID_INPUT, user_message="Channel indices must be contiguous from 0", field="channels"
            )
        previous = -1
        for event in self.triggers:
            if not 0 <= event.sample_index < self.n_samples:
                raise ValidationError(
                    code=ErrorCode.VALUE_OUT_OF_RANGE,
                    user_message=f"Trigger {event.code.name} at sample {event.sample_index} outside [0, {self.n_samples})",
                    field="triggers",
                )
            if event.sample_index < previous:
                raise ValidationError(
                    code=ErrorCode.INVALID_INPUT, user_message="Trigger sample indices must be non-decreasing", field="triggers"
                )
            previous = event.sample_index

    def indices(self, role: ChannelRole) -> list[int]:
        return [ch.index for ch in self.channels if ch.role is role]

    def select(self, role: ChannelRole) -> np.ndarray:
        """Rows of the sample matrix belonging to ``role`` (a copy)."""
        return np.array(self.samples[self.indices(role)])

    def with_samples(self, samples: np.ndarray) -> Recording:
        """Same montage, rate and triggers over a new sample matrix."""
        return Recording(self.channels, self.sample_rate_hz, samples, self.triggers)

    def segment(self, start: int, stop: int) -> Recording:
        """
        Slice ``[start, stop)`` in samples; triggers inside the range are rebased to the new origin.
        """
        start = max(0, start)
        stop = min(self.n_samples, stop)
        triggers = tuple(
            TriggerEvent(ev.code, ev.sample_index - start, ev.label) for ev in self.triggers if start <= ev.sample_index < stop
        )
        return Recording(self.channels, self.sample_rate_hz, np.array(self.samples[:, start:stop]), triggers)

    def equals(self, other: Recording) -> bool:
        """Bit-exact equality of montage, rate, samples and triggers."""
        return (
            self.channels == other.channels
            and self.sample_rate_hz == other.sample_rate_hz
            and self.samples.dtype == other.samples.dtype
            and self.samples.shape == other.samples.shape
            and self.samples.tobytes() == other.samples.tobytes()
            and self.triggers == other.triggers
        )


@dataclass(frozen=True)
class Epoch:
    data: np.ndarray
    sample_rate_hz: float
    label: ClassLabel
    trial_id: int
    phase: Phase
    channels: tuple[ChannelInfo, ...] = ()

    @property
    def n_samples(self) -> int:
        return int(self.data.shape[1])

    def scalp_data(self) -> np.ndarray:
        """Scalp EEG rows only; when the montage is unknown every row is treated as scalp."""
        if not self.channels:
            return self.data
        rows = [ch.index for ch in self.channels if ch.role is ChannelRole.SCALP_EEG]
        return self.data[rows]
