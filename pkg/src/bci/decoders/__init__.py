"""Six decoder kinds with trial-granular splitting, evaluation, grids and model files."""

from .dataset import Dataset, Representation, build_dataset, split_trials, stratified_split
from .evaluation import EvalReport, EvaluationResult, evaluate, majority_vote_index
from .grid import GridCell, rank_configurations, render_accuracy_table, train_grid
from .model import DecoderKind, DecoderModel, FeatureSpec, Prediction, TrainConfig, predict, predict_batch, train
from .serialization import load_model, save_model

__all__ = [
    "Dataset",
    "DecoderKind",
    "DecoderModel",
    "EvalReport",
    "EvaluationResult",
    "FeatureSpec",
    "GridCell",
    "Prediction",
    "Representation",
    "TrainConfig",
    "build_dataset",
    "evaluate",
    "load_model",
    "majority_vote_index",
    "predict",
    "predict_batch",
    "rank_configurations",
    "render_accuracy_table",
    "save_model",
    "split_trials",
    "stratified_split",
    "train",
    "train_grid",
]
