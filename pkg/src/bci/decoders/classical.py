"""
Classical decoders: ridge, k-nearest neighbours, decision tree and linear SVM.

Each is fit with scikit-learn and then frozen into float32 parameter arrays;
inference works from those arrays only, so a model and its reloaded copy
score identically.
"""

from __future__ import annotations

import logging
import warnings

import numpy as np
from scipy.special import softmax
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import RidgeClassifier, SGDClassifier
from sklearn.neighbors import KNeighborsClassifier
from sklearn.tree import DecisionTreeClassifier

from core.errors import ErrorCode, ValidationError

logger = logging.getLogger(__name__)

Params = dict[str, np.ndarray]

KNN_NEIGHBORS = 5
TREE_MAX_DEPTH = 12
TREE_MIN_LEAF = 5


def _require_all_classes(y: np.ndarray, n_classes: int) -> None:
    present = np.unique(y)
    if present.size != n_classes:
        raise ValidationError(
            code=ErrorCode.INVALID_INPUT,
            user_message=f"Training labels cover classes {present.tolist()} of {n_classes}",
            field="labels",
        )


def _linear_params(coef: np.ndarray, intercept: np.ndarray) -> Params:
    """One-vs-rest weights; a binary model's single margin becomes the pair ``(-m, m)``."""
    coef = np.atleast_2d(coef)
    intercept = np.atleast_1d(intercept)
    if coef.shape[0] == 1:
        coef = np.vstack([-coef, coef])
        intercept = np.concatenate([-intercept, intercept])
    return {"coef": coef.astype(np.float32), "intercept": intercept.astype(np.float32)}


def fit_ridge(x: np.ndarray, y: np.ndarray, n_classes: int, l2: float) -> Params:
    """Closed-form one-vs-rest ridge regression to +-1 targets."""
    _require_all_classes(y, n_classes)
    model = RidgeClassifier(alpha=max(l2, 1e-8), solver="cholesky")
    model.fit(x, y)
    return _linear_params(model.coef_, model.intercept_)


def fit_linear_svm(x: np.ndarray, y: np.ndarray, n_classes: int, l2: float, epochs: int, seed: int) -> Params:
    """One-vs-rest hinge loss with an l2 penalty, trained by stochastic subgradient descent."""
    _require_all_classes(y, n_classes)
    model = SGDClassifier(
        loss="hinge", penalty="l2", alpha=max(l2, 1e-6), max_iter=epochs, tol=1e-4, random_state=seed, shuffle=True
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        model.fit(x, y)
    logger.debug(f"Linear SVM stopped after {model.n_iter_} epochs")
    return _linear_params(model.coef_, model.intercept_)


def linear_scores(params: Params, x: np.ndarray) -> np.ndarray:
    """Softmax of the one-vs-rest margins."""
    coef = params["coef"].astype(np.float64)
    intercept = params["intercept"].astype(np.float64)
    return np.asarray(softmax(x @ coef.T + intercept, axis=1))


def fit_knn(x: np.ndarray, y: np.ndarray, n_classes: int) -> Params:
    """Store the (normalized) training set."""
    _require_all_classes(y, n_classes)
    return {"train_x": x.astype(np.float32), "train_y": y.astype(np.float32)}


def knn_scores(params: Params, x: np.ndarray, n_classes: int) -> np.ndarray:
    """Neighbour vote fractions over the ``k = 5`` nearest training windows (Euclidean)."""
    train_x = params["train_x"].astype(np.float64)
    train_y = params["train_y"].astype(np.int64)
    model = KNeighborsClassifier(n_neighbors=min(KNN_NEIGHBORS, train_x.shape[0]), algorithm="brute", metric="euclidean")
    model.fit(train_x, train_y)
    scores = np.zeros((x.shape[0], n_classes))
    scores[:, model.classes_] = model.predict_proba(x)
    return scores


def fit_tree(x: np.ndarray, y: np.ndarray, n_classes: int, seed: int) -> Params:
    """
    CART with Gini impurity, depth 12, minimum leaf size 5.

    Thresholds are rounded down to float32 so ``x <= t`` keeps its meaning
    for float32 inputs.
    """
    _require_all_classes(y, n_classes)
    model = DecisionTreeClassifier(
        criterion="gini", max_depth=TREE_MAX_DEPTH, min_samples_leaf=TREE_MIN_LEAF, random_state=seed
    )
    model.fit(x, y)
    tree = model.tree_
    threshold64 = np.asarray(tree.threshold, dtype=np.float64)
    threshold = threshold64.astype(np.float32)
    above = threshold.astype(np.float64) > threshold64
    threshold[above] = np.nextafter(threshold[above], np.float32(-np.inf))
    counts = np.asarray(tree.value)[:, 0, :]
    value = np.zeros((counts.shape[0], n_classes))
    value[:, model.classes_.astype(int)] = counts / counts.sum(axis=1, keepdims=True)
    return {
        "left": np.asarray(tree.children_left, dtype=np.float32),
        "right": np.asarray(tree.children_right, dtype=np.float32),
        "feature": np.maximum(np.asarray(tree.feature), 0).astype(np.float32),
        "threshold": threshold,
        "value": value.astype(np.float32),
    }


def tree_scores(params: Params, x: np.ndarray) -> np.ndarray:
    """Leaf class fractions reached by each row."""
    left = params["left"].astype(np.int64)
    right = params["right"].astype(np.int64)
    feature = params["feature"].astype(np.int64)
    threshold = params["threshold"]
    x32 = np.asarray(x, dtype=np.float32)
    rows = np.arange(x32.shape[0])
    node = np.zeros(x32.shape[0], dtype=np.int64)
    while True:
        internal = left[node] != -1
        if not internal.any():
            break
        go_left = x32[rows, feature[node]] <= threshold[node]
        node = np.where(internal, np.where(go_left, left[node], right[node]), node)
    return np.asarray(params["value"][node], dtype=np.float64)
