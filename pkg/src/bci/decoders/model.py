"""
Trained decoder models: training dispatch, normalization and deterministic inference.

Parameters are frozen as float32 arrays when training ends. Inference is a
pure function of those arrays and the input, so an in-memory model and its
reloaded copy produce bit-identical scores.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
import torch
from torch import nn

from core.errors import ErrorCode, ValidationError
from core.recording import ClassLabel, Task

from ..preprocess.filters import FrequencyProfile
from . import classical
from .dataset import Dataset, Representation
from .networks import MLP_HIDDEN, CompactCnn, Mlp, freeze_state, load_state, network_logits, train_network

logger = logging.getLogger(__name__)


class DecoderKind(Enum):
    RIDGE = "Ridge"
    KNN = "Knn"
    DECISION_TREE = "DecisionTree"
    LINEAR_SVM = "LinearSvm"
    MLP = "Mlp"
    COMPACT_CNN = "CompactCnn"

    @property
    def representation(self) -> Representation:
        return Representation.TIME if self is DecoderKind.COMPACT_CNN else Representation.DE

    @property
    def gradient_trained(self) -> bool:
        return self in (DecoderKind.MLP, DecoderKind.COMPACT_CNN)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 1000
    learning_rate: float = 1e-3
    batch_size: int = 64
    l2: float = 1e-4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValidationError(code=ErrorCode.VALUE_OUT_OF_RANGE, user_message="epochs must be at least 1", field="epochs")
        if self.batch_size < 1 or self.learning_rate <= 0 or self.l2 < 0:
            raise ValidationError(
                code=ErrorCode.VALUE_OUT_OF_RANGE,
                user_message="batch_size must be >= 1, learning_rate > 0 and l2 >= 0",
                field="train",
            )

    @classmethod
    def from_dict(cls, data: dict[str, Any], seed: int = 0) -> TrainConfig:
        return cls(
            epochs=int(data.get("epochs", 1000)),
            learning_rate=float(data.get("learning_rate", 1e-3)),
            batch_size=int(data.get("batch_size", 64)),
            l2=float(data.get("l2", 1e-4)),
            seed=seed,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "l2": self.l2,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class FeatureSpec:
    """
    Input layout and z-score statistics frozen at training time.

    DE inputs are normalized per feature; time-domain windows per channel.
    """

    representation: Representation
    input_shape: tuple[int, ...]
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def from_training(cls, ds: Dataset) -> FeatureSpec:
        x = np.asarray(ds.features, dtype=np.float64)
        axes = (0,) if ds.representation is Representation.DE else (0, 2)
        mean = x.mean(axis=axes)
        std = x.std(axis=axes)
        std = np.where(std > 1e-12, std, 1.0)
        if ds.representation is Representation.TIME:
            mean, std = mean[:, None], std[:, None]
        return cls(ds.representation, ds.input_shape, mean.astype(np.float32), std.astype(np.float32))

    def normalize(self, x: np.ndarray) -> np.ndarray:
        """Z-score a batch ``[n, *input_shape]``."""
        x = np.asarray(x, dtype=np.float64)
        if tuple(x.shape[1:]) != self.input_shape:
            raise ValidationError(
                code=ErrorCode.DIMENSION_MISMATCH,
                user_message=f"Input shape {tuple(x.shape[1:])} does not match model input {self.input_shape}",
                field="x",
            )
        return (x - self.mean.astype(np.float64)) / self.std.astype(np.float64)


@dataclass(frozen=True)
class Prediction:
    label: ClassLabel
    scores: np.ndarray


@dataclass
class DecoderModel:
    """A trained decoder. ``params`` are float32 and never modified after training."""

    kind: DecoderKind
    task: Task
    profile: FrequencyProfile
    feature_spec: FeatureSpec
    params: dict[str, np.ndarray]
    seed: int = 0
    hyperparameters: dict[str, Any] = field(default_factory=dict)
    loss_history: list[float] = field(default_factory=list, repr=False)
    _module: nn.Module | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        for array in self.params.values():
            array.flags.writeable = False
        if self.kind.gradient_trained:
            self._module = load_state(build_network(self.kind, self.feature_spec.input_shape, self.n_classes), self.params)

    @property
    def n_classes(self) -> int:
        return self.task.n_classes

    def scores(self, x: np.ndarray) -> np.ndarray:
        """Class probabilities ``[n × k]`` for a batch of raw (unnormalized) inputs."""
        z = self.feature_spec.normalize(x)
        if self.kind in (DecoderKind.RIDGE, DecoderKind.LINEAR_SVM):
            out = classical.linear_scores(self.params, z)
        elif self.kind is DecoderKind.KNN:
            out = classical.knn_scores(self.params, z, self.n_classes)
        elif self.kind is DecoderKind.DECISION_TREE:
            out = classical.tree_scores(self.params, z)
        else:
            assert self._module is not None
            logits = network_logits(self._module, z)
            logits -= logits.max(axis=1, keepdims=True)
            exp = np.exp(logits)
            out = exp / exp.sum(axis=1, keepdims=True)
        return np.asarray(out, dtype=np.float64)

    def parameter_hash(self) -> str:
        """SHA-256 over parameter names and bytes."""
        digest = hashlib.sha256()
        for name in sorted(self.params):
            digest.update(name.encode())
            digest.update(self.params[name].tobytes())
        return digest.hexdigest()


def build_network(kind: DecoderKind, input_shape: tuple[int, ...], n_classes: int) -> nn.Module:
    if kind is DecoderKind.MLP:
        if len(input_shape) != 1:
            raise ValidationError(
                code=ErrorCode.DIMENSION_MISMATCH, user_message="Mlp expects flat DE feature vectors", field="input_shape"
            )
        return Mlp(input_shape[0], n_classes)
    if kind is DecoderKind.COMPACT_CNN:
        if len(input_shape) != 2:
            raise ValidationError(
                code=ErrorCode.DIMENSION_MISMATCH,
                user_message="CompactCnn expects [channels × samples] windows",
                field="input_shape",
            )
        return CompactCnn(input_shape[0], input_shape[1], n_classes)
    raise ValidationError(code=ErrorCode.KIND_MISMATCH, user_message=f"{kind.value} is not a network decoder")


def train(ds: Dataset, kind: DecoderKind, cfg: TrainConfig) -> DecoderModel:
    """
    Fit one decoder kind on a training dataset.

    Args:
        ds: Training windows; DE rows for every kind except CompactCnn
        kind: Decoder kind
        cfg: Training hyperparameters and seed

    Returns:
        Trained, frozen model

    Raises:
        ValidationError: If the dataset representation does not suit the kind
        NumericalError: If a gradient-trained model's loss diverges
    """
    if ds.representation is not kind.representation:
        raise ValidationError(
            code=ErrorCode.DIMENSION_MISMATCH,
            user_message=f"{kind.value} needs {kind.representation.value} inputs, dataset holds {ds.representation.value}",
            field="representation",
        )
    spec = FeatureSpec.from_training(ds)
    x = spec.normalize(ds.features)
    y = ds.y
    k = ds.n_classes
    history: list[float] = []
    hyper: dict[str, Any]

    if kind is DecoderKind.RIDGE:
        params = classical.fit_ridge(x, y, k, cfg.l2)
        hyper = {"alpha": cfg.l2, "targets": "+-1 one-vs-rest"}
    elif kind is DecoderKind.LINEAR_SVM:
        params = classical.fit_linear_svm(x, y, k, cfg.l2, cfg.epochs, cfg.seed)
        hyper = {"loss": "hinge", "alpha": cfg.l2, "max_epochs": cfg.epochs}
    elif kind is DecoderKind.KNN:
        params = classical.fit_knn(x, y, k)
        hyper = {"k": classical.KNN_NEIGHBORS, "metric": "euclidean"}
    elif kind is DecoderKind.DECISION_TREE:
        params = classical.fit_tree(x, y, k, cfg.seed)
        hyper = {"criterion": "gini", "max_depth": classical.TREE_MAX_DEPTH, "min_samples_leaf": classical.TREE_MIN_LEAF}
    else:
        torch.manual_seed(cfg.seed)
        module = build_network(kind, spec.input_shape, k)
        history = train_network(
            module,
            x,
            y,
            epochs=cfg.epochs,
            learning_rate=cfg.learning_rate,
            batch_size=cfg.batch_size,
            l2=cfg.l2,
            seed=cfg.seed,
        )
        params = freeze_state(module)
        hyper = {"optimizer": "Adam", **cfg.to_dict()}
        if kind is DecoderKind.MLP:
            hyper["hidden"] = list(MLP_HIDDEN)

    model = DecoderModel(kind, ds.task, ds.profile, spec, params, cfg.seed, hyper, history)
    logger.info(f"Trained {kind.value} on {len(ds)} {ds.task.value} windows ({ds.profile.value})")
    return model


def predict_batch(m: DecoderModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Label indices (argmax, ties to the lowest index) and score rows for a batch."""
    scores = m.scores(x)
    return np.argmax(scores, axis=1), scores


def predict(m: DecoderModel, x: np.ndarray) -> Prediction:
    """
    Decode one input (a DE vector or a ``[channels × samples]`` window).

    Returns:
        Label (ties broken toward the lowest class index) and scores summing to 1
    """
    labels, scores = predict_batch(m, np.asarray(x)[None, ...])
    return Prediction(ClassLabel(m.task, int(labels[0])), scores[0])
