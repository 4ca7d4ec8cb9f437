"""Soft-margin kernel SVM trained with SMO.

Each SMO step updates the maximal KKT-violating pair (first index by
largest violation, partner by second-order gain, lowest index on ties), so
training is deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

GOOD = "good"
BAD = "bad"


class NotSplittable(ValueError):
    """The labels (or the trained classifier) do not separate the samples into two classes."""


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    degree: int = 3
    coef0: float = 1.0
    gamma: float | str = "scale"

    def __post_init__(self):
        if self.kind not in ("linear", "poly", "rbf"):
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.kind == "poly" and self.degree < 2:
            raise ValueError("polynomial degree must be at least 2")
        if not isinstance(self.gamma, str) and not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if isinstance(self.gamma, str) and self.gamma != "scale":
            raise ValueError("gamma must be a positive number or 'scale'")


def kernel_matrix(A, B, kind, gamma=1.0, degree=3, coef0=1.0):
    if kind == "linear":
        return A @ B.T
    if kind == "poly":
        return (gamma * (A @ B.T) + coef0) ** degree
    sq = (np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :] - 2.0 * (A @ B.T))
    return np.exp(-gamma * np.maximum(sq, 0.0))


@numba.njit(cache=True)
def _smo(K, y, C, tol, max_iter):
    # Dual: min 0.5 a'Qa - sum(a), Q = yy'K, 0 <= a <= C, y'a = 0.
    # Working pair: maximal violator i, second-order partner j; stop on gap < tol.
    n = len(y)
    alpha = np.zeros(n)
    G = -np.ones(n)
    for _ in range(max_iter):
        i = -1
        g_max = -np.inf
        for t in range(n):
            up = (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0.0)
            if up and -y[t] * G[t] > g_max:
                g_max = -y[t] * G[t]
                i = t
        j = -1
        g_min = np.inf
        best = np.inf
        for t in range(n):
            low = (y[t] > 0 and alpha[t] > 0.0) or (y[t] < 0 and alpha[t] < C)
            if not low:
                continue
            v = -y[t] * G[t]
            if v < g_min:
                g_min = v
            if i >= 0 and v < g_max:
                gap = g_max - v
                curv = K[i, i] + K[t, t] - 2.0 * K[i, t]
                if curv <= 0.0:
                    curv = 1e-12
                score = -gap * gap / curv
                if score < best:
                    best = score
                    j = t
        if i < 0 or j < 0 or g_max - g_min < tol:
            break
        curv = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if curv <= 0.0:
            curv = 1e-12
        step = (g_max + y[j] * G[j]) / curv
        room_i = C - alpha[i] if y[i] > 0 else alpha[i]
        room_j = alpha[j] if y[j] > 0 else C - alpha[j]
        step = min(step, room_i, room_j)
        d_i = y[i] * step
        d_j = -y[j] * step
        alpha[i] = min(max(alpha[i] + d_i, 0.0), C)
        alpha[j] = min(max(alpha[j] + d_j, 0.0), C)
        for t in range(n):
            G[t] += y[t] * (y[i] * K[t, i] * d_i + y[j] * K[t, j] * d_j)
    # bias from free vectors, midpoint of the feasible interval otherwise
    total = 0.0
    count = 0
    ub = np.inf
    lb = -np.inf
    for t in range(n):
        yg = y[t] * G[t]
        if 0.0 < alpha[t] < C:
            total += yg
            count += 1
        elif (alpha[t] >= C and y[t] < 0) or (alpha[t] <= 0.0 and y[t] > 0):
            ub = min(ub, yg)
        else:
            lb = max(lb, yg)
    rho = total / count if count > 0 else 0.5 * (ub + lb)
    return alpha, -rho


class SMOClassifier(ClassifierMixin, BaseEstimator):
    """Binary soft-margin SVM.

    Labels are 0/1 (1 = good). Inputs can be rescaled per dimension to
    ``[0, 1]`` with ``feature_lower``/``feature_upper``; the partition tree
    passes the domain bounds so the region geometry does not drift with
    sample statistics. With ``cardinalities`` set, every input column is a
    categorical code and is one-hot encoded instead, so the kernel does not
    read an order into nominal choices.

    Parameters
    ----------
    C : float, default 1.0
        Box constraint on the dual coefficients.
    tol : float, default 1e-3
        Stop once the maximal KKT violation gap drops below this.
    kernel : {'rbf', 'linear', 'poly'}
    gamma : float or 'scale'
        'scale' uses ``1 / (d * X.var())`` on the (scaled) training inputs.
    max_passes : int
        Iteration budget in units of ``n_samples`` pair updates.
    cardinalities : sequence of int, optional
        Number of codes per column; switches on one-hot encoding.
    """

    def __init__(self, C=1.0, kernel="rbf", gamma="scale", degree=3, coef0=1.0, tol=1e-3,
                 max_passes=10, feature_lower=None, feature_upper=None, cardinalities=None):
        self.C = C
        self.kernel = kernel
        self.gamma = gamma
        self.degree = degree
        self.coef0 = coef0
        self.tol = tol
        self.max_passes = max_passes
        self.feature_lower = feature_lower
        self.feature_upper = feature_upper
        self.cardinalities = cardinalities

    def _scale(self, X):
        if self.cardinalities is not None:
            codes = np.rint(X).astype(np.int64)
            return np.concatenate([codes[:, [j]] == np.arange(card)
                                   for j, card in enumerate(self.cardinalities)], axis=1).astype(float)
        return (X - self.shift_) / self.scale_

    def _kernel(self, A, B):
        return kernel_matrix(A, B, self.kernel, self.gamma_, self.degree, self.coef0)

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        y = np.asarray(y).astype(int)
        if len(X) < 2:
            raise ValueError("need at least two training samples")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0 (bad) or 1 (good)")
        if np.all(y == y[0]):
            raise NotSplittable("training labels contain a single class")
        KernelSpec(self.kernel, self.degree, self.coef0, self.gamma)
        d = X.shape[1]
        if self.feature_lower is not None:
            lower = np.asarray(self.feature_lower, dtype=float)
            upper = np.asarray(self.feature_upper, dtype=float)
            self.shift_, self.scale_ = lower, upper - lower
        else:
            self.shift_, self.scale_ = np.zeros(d), np.ones(d)
        if self.cardinalities is not None and len(self.cardinalities) != d:
            raise ValueError(f"got {len(self.cardinalities)} cardinalities for {d} features")
        Xs = self._scale(X)
        if self.gamma == "scale":
            var = Xs.var()
            self.gamma_ = 1.0 / (Xs.shape[1] * var) if var > 0 else 1.0
        else:
            self.gamma_ = float(self.gamma)
        signs = np.where(y == 1, 1.0, -1.0)
        K = self._kernel(Xs, Xs)
        budget = int(self.max_passes) * max(len(X), 100)
        alpha, b = _smo(K, signs, float(self.C), float(self.tol), budget)
        support = alpha > 1e-10
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = d
        self.support_ = np.flatnonzero(support)
        self.support_vectors_ = X[support]
        self._support_scaled = Xs[support]
        self.dual_coef_ = alpha[support] * signs[support]
        self.intercept_ = float(b)
        return self

    @property
    def coef_(self):
        """Primal weights (linear kernel only), in scaled input coordinates."""
        if self.kernel != "linear":
            raise AttributeError("coef_ is only available for the linear kernel")
        return self.dual_coef_ @ self._support_scaled

    def decision_function(self, X):
        check_is_fitted(self, "dual_coef_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        if len(self.dual_coef_) == 0:
            return np.full(len(X), self.intercept_)
        out = np.empty(len(X))
        for start in range(0, len(X), 4096):
            K = self._kernel(self._scale(X[start:start + 4096]), self._support_scaled)
            out[start:start + 4096] = K @ self.dual_coef_ + self.intercept_
        return out

    def predict(self, X):
        # exact zeros count as bad
        return (self.decision_function(X) > 0).astype(int)


def _encode_labels(y):
    out = []
    for label in y:
        if label in (GOOD, True, 1):
            out.append(1)
        elif label in (BAD, False, 0):
            out.append(0)
        else:
            raise ValueError(f"unknown label {label!r}")
    return np.array(out, dtype=int)


def train_svm(X, y, kernel: KernelSpec = KernelSpec(), c_reg: float = 1.0, tol: float = 1e-3,
              max_passes: int = 10, bounds=None) -> SMOClassifier:
    """Fit an :class:`SMOClassifier`; ``y`` holds 'good'/'bad' (or 1/0) labels.

    ``bounds`` is an optional ``(lower, upper)`` pair used for feature scaling.
    """
    X = np.asarray(X, dtype=float)
    if len(X) < 2 or len(X) != len(y):
        raise ValueError("need at least two samples and one label per sample")
    lower, upper = (None, None) if bounds is None else bounds
    model = SMOClassifier(C=c_reg, kernel=kernel.kind, gamma=kernel.gamma, degree=kernel.degree,
                          coef0=kernel.coef0, tol=tol, max_passes=max_passes,
                          feature_lower=lower, feature_upper=upper)
    return model.fit(X, _encode_labels(y))


def decision_value(model: SMOClassifier, x) -> float:
    return float(model.decision_function(np.atleast_2d(np.asarray(x, dtype=float)))[0])


def predict(model: SMOClassifier, x) -> str:
    return GOOD if decision_value(model, x) > 0 else BAD
