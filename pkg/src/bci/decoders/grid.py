"""
Offline model x frequency-profile grids.

Every (kind, profile) cell is trained on the same trial split and evaluated
at window and trial level. The rendered table marks, within each profile
column, the best model with ``*`` and the runner-up with ``_``; ``^`` marks
each model's best profile.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from core.recording import Epoch

from ..preprocess.filters import FrequencyProfile
from .dataset import Representation, build_dataset, split_trials
from .evaluation import EvaluationResult, evaluate
from .model import DecoderKind, DecoderModel, TrainConfig, train

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridCell:
    kind: DecoderKind
    profile: FrequencyProfile
    model: DecoderModel
    result: EvaluationResult

    def accuracy(self, level: str = "trial") -> float:
        return self.result.trial.accuracy if level == "trial" else self.result.window.accuracy


GridResult = dict[tuple[DecoderKind, FrequencyProfile], GridCell]


def train_grid(
    epochs_by_profile: dict[FrequencyProfile, list[Epoch]],
    kinds: list[DecoderKind],
    cfg: TrainConfig,
    test_fraction: float = 0.2,
    split_seed: int = 0,
) -> GridResult:
    """
    Train and evaluate every requested (kind, profile) pair.

    Args:
        epochs_by_profile: Epochs preprocessed under each profile; trial ids must agree across profiles
        kinds: Decoder kinds to train
        cfg: Shared training configuration
        test_fraction: Share of trials per class held out
        split_seed: Seed of the trial split, shared by every cell

    Returns:
        Mapping from (kind, profile) to the trained model and its evaluation
    """
    results: GridResult = {}
    for profile, epochs in epochs_by_profile.items():
        representations = {kind.representation for kind in kinds}
        datasets = {rep: build_dataset(epochs, profile, rep) for rep in sorted(representations, key=lambda r: r.value)}
        reference = datasets.get(Representation.DE) or next(iter(datasets.values()))
        train_ids, test_ids = split_trials(reference, test_fraction, split_seed)
        for kind in kinds:
            ds = datasets[kind.representation]
            model = train(ds.subset_trials(train_ids), kind, cfg)
            results[(kind, profile)] = GridCell(kind, profile, model, evaluate(model, ds.subset_trials(test_ids)))
    logger.info(f"Trained grid of {len(results)} models")
    return results


def rank_configurations(results: GridResult, top_k: int = 2, level: str = "trial") -> list[GridCell]:
    """Best ``top_k`` cells by accuracy; ties keep kind then profile order."""
    kind_order = list(DecoderKind)
    profile_order = list(FrequencyProfile)
    cells = sorted(
        results.values(),
        key=lambda c: (-c.accuracy(level), kind_order.index(c.kind), profile_order.index(c.profile)),
    )
    return cells[:top_k]


def _column_marks(results: GridResult, kinds: list[DecoderKind], profile: FrequencyProfile, level: str) -> dict[DecoderKind, str]:
    ranked = sorted(
        (k for k in kinds if (k, profile) in results), key=lambda k: -results[(k, profile)].accuracy(level)
    )
    marks: dict[DecoderKind, str] = {}
    if ranked:
        marks[ranked[0]] = "*"
    if len(ranked) > 1:
        marks[ranked[1]] = "_"
    return marks


def render_accuracy_table(results: GridResult, level: str = "trial") -> str:
    """
    Render the accuracy grid as aligned text.

    Args:
        results: Output of ``train_grid``
        level: ``"trial"`` or ``"window"`` accuracy

    Returns:
        Table text with one row per model and one column per profile
    """
    kinds = [k for k in DecoderKind if any(key[0] is k for key in results)]
    profiles = [p for p in FrequencyProfile if any(key[1] is p for key in results)]
    marks = {p: _column_marks(results, kinds, p, level) for p in profiles}

    header = f"{'Model':<14}" + "".join(f"{p.value:>12}" for p in profiles)
    lines = [f"{level.title()}-level accuracy (%)", header, "-" * len(header)]
    for kind in kinds:
        row_cells = {p: results[(kind, p)].accuracy(level) for p in profiles if (kind, p) in results}
        row_best = max(row_cells, key=lambda p: row_cells[p]) if row_cells else None
        cells = []
        for p in profiles:
            if p not in row_cells:
                cells.append(f"{'-':>12}")
                continue
            tag = marks[p].get(kind, "") + ("^" if p is row_best else "")
            cells.append(f"{100 * row_cells[p]:>9.2f}{tag:<3}")
        lines.append(f"{kind.value:<14}" + "".join(cells))
    lines.append("* best model per profile, _ runner-up, ^ best profile per model")
    return "\n".join(lines) + "\n"
