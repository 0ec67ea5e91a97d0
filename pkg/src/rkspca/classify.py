"""k-nearest-neighbour and RBF kernel ridge regression classifiers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, NumericalError


@dataclass(frozen=True)
class KnnConfig:
    k: int = 1

    def __post_init__(self):
        if int(self.k) < 1:
            raise InvalidInputError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class KrrConfig:
    """``gamma=None`` selects ``1 / (d * median feature variance)`` at fit time."""

    gamma: float | None = None
    alpha: float = 1e-3

    def __post_init__(self):
        if self.gamma is not None and not self.gamma > 0:
            raise InvalidInputError(f"gamma must be > 0, got {self.gamma}")
        if not self.alpha > 0:
            raise InvalidInputError(f"alpha must be > 0, got {self.alpha}")


@dataclass(frozen=True)
class KrrModel:
    train_X: np.ndarray
    coef: np.ndarray
    gamma: float
    config: KrrConfig

    @property
    def class_count(self):
        return self.coef.shape[1]


def _as_2d(X, name):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {X.shape}")
    return X


def _sq_dists(A, B):
    # explicit differences: exact zeros for identical rows, unlike the expanded form
    diff = A[:, None, :] - B[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def knn_predict(train_X, train_y, test_X, cfg: KnnConfig = KnnConfig()):
    """Majority vote among the k nearest training rows (Euclidean).

    Vote ties go to the tied label with the smallest summed distance, then
    to the lowest label id. Neighbour selection breaks distance ties by
    (distance, label), so the result does not depend on training-row order.
    """
    train_X = _as_2d(train_X, "train_X")
    test_X = _as_2d(test_X, "test_X")
    train_y = np.asarray(train_y, dtype=np.int64)
    n = train_X.shape[0]
    if train_X.shape[1] != test_X.shape[1]:
        raise InvalidInputError(f"train has {train_X.shape[1]} features, test has {test_X.shape[1]}")
    if train_y.shape != (n,):
        raise InvalidInputError("train_y length must match train_X rows")
    if cfg.k > n:
        raise InvalidInputError(f"k={cfg.k} exceeds training-set size {n}")

    dist = np.sqrt(_sq_dists(test_X, train_X))
    preds = np.empty(test_X.shape[0], dtype=np.int64)
    for i, row in enumerate(dist):
        order = np.lexsort((train_y, row))[: cfg.k]
        votes: dict[int, list] = {}
        for j in order:
            c = votes.setdefault(int(train_y[j]), [0, 0.0])
            c[0] += 1
            c[1] += row[j]
        preds[i] = min(votes, key=lambda lab: (-votes[lab][0], votes[lab][1], lab))
    return preds


def rbf_kernel(X, Y, gamma):
    X = _as_2d(X, "X")
    Y = _as_2d(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise InvalidInputError(f"X has {X.shape[1]} features, Y has {Y.shape[1]}")
    if not gamma > 0:
        raise InvalidInputError(f"gamma must be > 0, got {gamma}")
    return np.exp(-gamma * _sq_dists(X, Y))


def default_gamma(X):
    X = _as_2d(X, "X")
    med = float(np.median(X.var(axis=0)))
    if med <= 0.0:
        med = 1.0
    return 1.0 / (X.shape[1] * med)


def one_hot(y, class_count):
    y = np.asarray(y, dtype=np.int64)
    Y = np.zeros((y.shape[0], class_count))
    Y[np.arange(y.shape[0]), y] = 1.0
    return Y


def krr_fit(train_X, train_y, class_count, cfg: KrrConfig = KrrConfig()):
    """Solve ``(K + alpha I) C = Y`` for one-hot targets Y."""
    train_X = _as_2d(train_X, "train_X")
    train_y = np.asarray(train_y, dtype=np.int64)
    if train_X.shape[0] < 1:
        raise InvalidInputError("need at least one training sample")
    if train_y.shape != (train_X.shape[0],):
        raise InvalidInputError("train_y length must match train_X rows")
    if train_y.min() < 0 or train_y.max() >= class_count:
        raise InvalidInputError(f"labels must lie in [0, {class_count})")

    gamma = cfg.gamma if cfg.gamma is not None else default_gamma(train_X)
    A = rbf_kernel(train_X, train_X, gamma)
    A[np.diag_indices_from(A)] += cfg.alpha
    Y = one_hot(train_y, class_count)
    try:
        C = scipy.linalg.solve(A, Y, assume_a="pos", check_finite=True)
    except scipy.linalg.LinAlgError:
        # rounding can make a tiny-alpha Gram matrix fail Cholesky
        try:
            C = scipy.linalg.solve(A, Y, assume_a="sym")
        except (scipy.linalg.LinAlgError, ValueError) as exc:
            raise NumericalError(f"kernel ridge solve failed: {exc}") from exc
    except ValueError as exc:
        raise NumericalError(f"kernel ridge solve failed: {exc}") from exc
    if not np.all(np.isfinite(C)):
        raise NumericalError("kernel ridge solve produced non-finite coefficients")
    return KrrModel(train_X.copy(), C, gamma, cfg)


def krr_scores(model: KrrModel, test_X):
    test_X = _as_2d(test_X, "test_X")
    if test_X.shape[1] != model.train_X.shape[1]:
        raise InvalidInputError(f"test has {test_X.shape[1]} features, model expects {model.train_X.shape[1]}")
    return rbf_kernel(test_X, model.train_X, model.gamma) @ model.coef


SCORE_TIE_RTOL = 1e-12


def krr_predict(model: KrrModel, test_X):
    """Argmax of class scores; scores within a relative 1e-12 of the row
    maximum count as tied and the lowest class id wins."""
    S = krr_scores(model, test_X)
    top = S.max(axis=1, keepdims=True)
    scale = np.maximum(np.abs(S).max(axis=1, keepdims=True), np.finfo(float).tiny)
    tied = S >= top - SCORE_TIE_RTOL * scale
    return np.argmax(tied, axis=1).astype(np.int64)


def accuracy(pred, truth):
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise InvalidInputError(f"prediction shape {pred.shape} does not match truth {truth.shape}")
    if pred.size == 0:
        raise InvalidInputError("accuracy of an empty prediction is undefined")
    return float(np.mean(pred == truth))
