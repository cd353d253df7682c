"""Trial decisions from per-window predictions."""

from __future__ import annotations

import numpy as np

from core.errors import ErrorCode, ValidationError

from ..decoders.evaluation import majority_vote_index
from .config import Aggregation

WindowVote = tuple[int, np.ndarray]


def aggregate_votes(preds: list[WindowVote], mode: Aggregation = Aggregation.MAJORITY_VOTE) -> tuple[int, np.ndarray]:
    """
    Combine window predictions into one trial label.

    MajorityVote takes the modal label (ties: highest mean score, then lowest
    index). MeanScore takes the argmax of the averaged scores, ties to the
    lowest index. Both return the averaged scores.

    Raises:
        ValidationError: If ``preds`` is empty
    """
    if not preds:
        raise ValidationError(code=ErrorCode.EMPTY_INPUT, user_message="No window predictions to aggregate", field="preds")
    labels = np.array([label for label, _ in preds], dtype=np.int64)
    scores = np.stack([np.asarray(s, dtype=np.float64) for _, s in preds])
    mean_scores = scores.mean(axis=0)
    if mode is Aggregation.MEAN_SCORE:
        return int(np.argmax(mean_scores)), mean_scores
    return majority_vote_index(labels, scores, scores.shape[1]), mean_scores
