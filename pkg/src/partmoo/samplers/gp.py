"""Exact GP regression with an isotropic RBF kernel fit by marginal likelihood."""
from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.optimize import minimize
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y


class GPFitError(RuntimeError):
    pass


def _rbf(A, B, lengthscale, variance):
    sq = np.sum(A * A, 1)[:, None] + np.sum(B * B, 1)[None, :] - 2 * A @ B.T
    return variance * np.exp(-0.5 * np.maximum(sq, 0.0) / lengthscale**2)


class GaussianProcess(RegressorMixin, BaseEstimator):
    """Zero-mean GP on standardized targets.

    Log lengthscale and log signal variance are tuned by L-BFGS on the
    negative log marginal likelihood for ``n_steps`` iterations. A singular
    kernel matrix is retried with 10x the jitter up to ``max_retries`` times
    before :class:`GPFitError` is raised.
    """

    def __init__(self, lengthscale=0.5, variance=1.0, jitter=1e-6, n_steps=50, max_retries=3):
        self.lengthscale = lengthscale
        self.variance = variance
        self.jitter = jitter
        self.n_steps = n_steps
        self.max_retries = max_retries

    def _nll(self, theta, X, y, jitter):
        ls, var = np.exp(theta)
        n = len(X)
        sq = np.sum(X * X, 1)[:, None] + np.sum(X * X, 1)[None, :] - 2 * X @ X.T
        sq = np.maximum(sq, 0.0)
        K0 = np.exp(-0.5 * sq / ls**2)
        K = var * K0 + jitter * np.eye(n)
        try:
            factor = cho_factor(K, lower=True)
        except np.linalg.LinAlgError:
            return 1e25, np.zeros(2)
        alpha = cho_solve(factor, y)
        logdet = 2 * np.sum(np.log(np.diag(factor[0])))
        nll = 0.5 * y @ alpha + 0.5 * logdet + 0.5 * n * np.log(2 * np.pi)
        inner = np.outer(alpha, alpha) - cho_solve(factor, np.eye(n))
        dK_dls = var * K0 * sq / ls**2
        dK_dvar = var * K0
        grad = -0.5 * np.array([np.sum(inner * dK_dls), np.sum(inner * dK_dvar)])
        return nll, grad

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float, y_numeric=True)
        self.y_mean_ = float(y.mean())
        self.y_std_ = float(y.std()) or 1.0
        ys = (y - self.y_mean_) / self.y_std_
        jitter = self.jitter
        for _ in range(self.max_retries + 1):
            theta0 = np.log([self.lengthscale, self.variance])
            result = minimize(self._nll, theta0, args=(X, ys, jitter), jac=True, method="L-BFGS-B",
                              bounds=[(np.log(1e-2), np.log(10.0)), (np.log(1e-2), np.log(1e2))],
                              options={"maxiter": self.n_steps})
            ls, var = np.exp(result.x)
            K = _rbf(X, X, ls, var) + jitter * np.eye(len(X))
            try:
                self.factor_ = cho_factor(K, lower=True)
                break
            except np.linalg.LinAlgError:
                jitter *= 10
        else:
            raise GPFitError("kernel matrix stayed singular after jitter retries")
        self.X_train_ = X
        self.lengthscale_, self.variance_, self.jitter_ = ls, var, jitter
        self.alpha_ = cho_solve(self.factor_, ys)
        return self

    def predict(self, X, return_std=False):
        check_is_fitted(self, "alpha_")
        X = check_array(X, dtype=float)
        Ks = _rbf(X, self.X_train_, self.lengthscale_, self.variance_)
        mean = Ks @ self.alpha_ * self.y_std_ + self.y_mean_
        if not return_std:
            return mean
        v = cho_solve(self.factor_, Ks.T)
        var = np.maximum(self.variance_ - np.sum(Ks * v.T, axis=1), 0.0)
        return mean, np.sqrt(var) * self.y_std_
