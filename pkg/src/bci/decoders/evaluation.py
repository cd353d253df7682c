"""
Window-level and trial-level evaluation.

Trial-level decisions are a majority vote over the trial's windows; ties go to
the label with the highest mean score, then to the lowest class index.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from core.errors import ErrorCode, ValidationError

from .dataset import Dataset
from .model import DecoderModel, predict_batch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalReport:
    """Accuracy and confusion (rows true, columns predicted) at one granularity."""

    accuracy: float
    confusion: np.ndarray
    per_class_recall: np.ndarray
    chance_level: float
    n: int

    @classmethod
    def from_predictions(cls, y_true: np.ndarray, y_pred: np.ndarray, n_classes: int) -> EvalReport:
        confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
        np.add.at(confusion, (y_true, y_pred), 1)
        totals = confusion.sum(axis=1)
        recall = np.divide(np.diag(confusion), totals, out=np.zeros(n_classes), where=totals > 0)
        total = int(confusion.sum())
        return cls(
            accuracy=float(np.trace(confusion) / total) if total else 0.0,
            confusion=confusion,
            per_class_recall=recall,
            chance_level=1.0 / n_classes,
            n=total,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "accuracy": self.accuracy,
            "confusion": self.confusion.tolist(),
            "per_class_recall": self.per_class_recall.tolist(),
            "chance_level": self.chance_level,
            "n": self.n,
        }


@dataclass(frozen=True)
class EvaluationResult:
    window: EvalReport
    trial: EvalReport

    def to_dict(self) -> dict[str, Any]:
        return {"window": self.window.to_dict(), "trial": self.trial.to_dict()}


def majority_vote_index(labels: np.ndarray, scores: np.ndarray, n_classes: int) -> int:
    """
    Modal label of a set of window predictions.

    Ties are broken by the highest mean score among the tied labels, then by
    the lowest class index.
    """
    counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=n_classes)
    tied = np.flatnonzero(counts == counts.max())
    if tied.size == 1:
        return int(tied[0])
    mean_scores = np.asarray(scores, dtype=np.float64).mean(axis=0)
    return int(tied[np.argmax(mean_scores[tied])])


def evaluate(m: DecoderModel, test: Dataset) -> EvaluationResult:
    """
    Score a model on held-out windows at window and trial granularity.

    Raises:
        ValidationError: If the test set is empty or belongs to another task
    """
    if len(test) == 0:
        raise ValidationError(code=ErrorCode.EMPTY_INPUT, user_message="Cannot evaluate on an empty test set")
    if test.task is not m.task:
        raise ValidationError(
            code=ErrorCode.INVALID_INPUT,
            user_message=f"{m.task.value} model cannot be evaluated on {test.task.value} data",
            field="task",
        )
    y_true = test.y
    y_pred, scores = predict_batch(m, test.features)
    window = EvalReport.from_predictions(y_true, y_pred, m.n_classes)

    trial_true: list[int] = []
    trial_pred: list[int] = []
    for trial in test.trials():
        rows = test.trial_ids == trial
        trial_true.append(int(y_true[rows][0]))
        trial_pred.append(majority_vote_index(y_pred[rows], scores[rows], m.n_classes))
    trial = EvalReport.from_predictions(np.array(trial_true), np.array(trial_pred), m.n_classes)

    logger.info(
        f"{m.kind.value}/{m.profile.value}: window accuracy {window.accuracy:.3f} (n={window.n}), "
        f"trial accuracy {trial.accuracy:.3f} (n={trial.n})"
    )
    return EvaluationResult(window=window, trial=trial)
