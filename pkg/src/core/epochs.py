"""
Trigger-driven epoching.

Phase boundaries come only from trigger markers, never from wall-clock
arithmetic, so timing jitter in a recording cannot desynchronize labels.
"""

from __future__ import annotations

import logging

import numpy as np

from .errors import ErrorCode, ValidationError
from .recording import ClassLabel, Epoch, Phase, Recording, TriggerCode, TriggerEvent

logger = logging.getLogger(__name__)

_PHASE_STARTS: dict[Phase, frozenset[TriggerCode]] = {
    Phase.IMAGERY: frozenset({TriggerCode.IMAGERY_START}),
    Phase.PERCEPTION: frozenset({TriggerCode.STIMULUS_ON, TriggerCode.CUE_LEFT, TriggerCode.CUE_RIGHT}),
}
_PHASE_ENDS: dict[Phase, TriggerCode] = {
    Phase.IMAGERY: TriggerCode.IMAGERY_END,
    Phase.PERCEPTION: TriggerCode.IMAGERY_START,
}
_TRIAL_RESET = frozenset({TriggerCode.FIXATION_ON, TriggerCode.TRIAL_END})


def slice_epochs(rec: Recording, phase: Phase) -> list[Epoch]:
    """
    Cut one epoch per trial covering exactly the selected phase.

    The start trigger of the phase opens an epoch and the matching end trigger
    closes it; the label comes from the start trigger or, failing that, from the
    most recent labelled trigger of the same trial.

    Args:
        rec: Continuous recording with phase triggers
        phase: Phase to extract

    Returns:
        Epochs in trial order (empty for a recording without trials)

    Raises:
        ValidationError: On unpaired triggers or a trial without a label
    """
    starts = _PHASE_STARTS[phase]
    end_code = _PHASE_ENDS[phase]
    epochs: list[Epoch] = []
    open_start: TriggerEvent | None = None
    trial_label: ClassLabel | None = None

    for event in rec.triggers:
        if event.code in _TRIAL_RESET:
            if open_start is not None:
                raise _unpaired(phase, event, "trial boundary inside an open phase")
            trial_label = None
        if event.label is not None:
            trial_label = event.label

        if event.code in starts:
            if open_start is not None:
                raise _unpaired(phase, event, "phase start while a previous phase is still open")
            open_start = event
        elif event.code is end_code and open_start is not None:
            label = open_start.label or trial_label
            if label is None:
                raise ValidationError(
                    code=ErrorCode.MISSING_LABEL,
                    user_message=f"Trial {len(epochs)} starting at sample {open_start.sample_index} has no class label",
                    field="triggers",
                )
            data = np.array(rec.samples[:, open_start.sample_index : event.sample_index])
            epochs.append(
                Epoch(
                    data=data,
                    sample_rate_hz=rec.sample_rate_hz,
                    label=label,
                    trial_id=len(epochs),
                    phase=phase,
                    channels=rec.channels,
                )
            )
            open_start = None
        elif event.code is TriggerCode.IMAGERY_END and phase is Phase.IMAGERY:
            raise _unpaired(phase, event, "imagery end without a matching start")

    if open_start is not None:
        raise _unpaired(phase, open_start, "phase never closed")

    logger.debug(f"Sliced {len(epochs)} {phase.value} epochs")
    return epochs


def _unpaired(phase: Phase, event: TriggerEvent, reason: str) -> ValidationError:
    return ValidationError(
        code=ErrorCode.UNPAIRED_TRIGGERS,
        user_message=f"Unpaired {phase.value} triggers at sample {event.sample_index} ({event.code.name}): {reason}",
        field="triggers",
    )
