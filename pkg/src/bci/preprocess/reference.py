"""Linked-mastoid re-referencing."""

from __future__ import annotations

import numpy as np

from core.errors import ErrorCode, ValidationError
from core.recording import ChannelRole, Recording


def rereference_linked_mastoids(rec: Recording) -> Recording:
    """
    Subtract the per-sample mean of the two mastoid channels from every scalp channel.

    EOG, ECG and mastoid rows are left untouched, so applying the operation
    twice subtracts the same reference again.

    Raises:
        ValidationError: If the montage does not have exactly two mastoid channels
    """
    mastoids = rec.indices(ChannelRole.MASTOID)
    if len(mastoids) != 2:
        raise ValidationError(
            code=ErrorCode.INVALID_INPUT,
            user_message=f"Linked-mastoid reference needs 2 mastoid channels, montage has {len(mastoids)}",
            field="channels",
        )
    samples = np.array(rec.samples, dtype=np.float64)
    reference = samples[mastoids].mean(axis=0)
    scalp = rec.indices(ChannelRole.SCALP_EEG)
    samples[scalp] -= reference
    return rec.with_samples(samples)
