"""Logistic regression and Gaussian naive Bayes for binary targets."""

from __future__ import annotations

import numpy as np
from scipy.special import expit, logsumexp

VARIANCE_FLOOR = 1e-9


class LogisticRegression:
    """L2-penalized logistic regression fit by full-batch gradient descent.

    Features are standardized internally. The step size is the inverse of the
    log-loss gradient's Lipschitz constant, so descent is monotone. Stops when
    every gradient component is below ``tol`` or after ``max_iter`` steps.
    The intercept is not penalized.
    """

    def __init__(self, l2=0.0, tol=1e-6, max_iter=10_000):
        self.l2 = float(l2)
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        self.mean_ = X.mean(axis=0)
        sd = X.std(axis=0)
        self.scale_ = np.where(sd > 0, sd, 1.0)
        Z = np.column_stack([(X - self.mean_) / self.scale_, np.ones(len(X))])
        n, d = Z.shape
        lipschitz = 0.25 * np.linalg.eigvalsh(Z.T @ Z / n).max() + self.l2
        step = 1.0 / lipschitz
        penalty = np.full(d, self.l2)
        penalty[-1] = 0.0
        w = np.zeros(d)
        self.n_iter_ = self.max_iter
        for it in range(self.max_iter):
            grad = Z.T @ (expit(Z @ w) - y) / n + penalty * w
            if np.abs(grad).max() < self.tol:
                self.n_iter_ = it
                break
            w -= step * grad
        self.coef_ = w[:-1] / self.scale_
        self.intercept_ = w[-1] - self.coef_ @ self.mean_
        return self

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coef_ + self.intercept_

    def predict_proba(self, X) -> np.ndarray:
        return expit(self.decision_function(X))


class GaussianNaiveBayes:
    """Per-class independent normal likelihoods with a variance floor."""

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        self.classes_ = np.array([0, 1])
        self.log_prior_ = np.empty(2)
        self.mean_ = np.empty((2, X.shape[1]))
        self.var_ = np.empty((2, X.shape[1]))
        for c in (0, 1):
            xc = X[y == c]
            self.log_prior_[c] = np.log(len(xc) / len(X))
            self.mean_[c] = xc.mean(axis=0)
            self.var_[c] = np.maximum(xc.var(axis=0), VARIANCE_FLOOR)
        return self

    def _joint_log_likelihood(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.empty((X.shape[0], 2))
        for c in (0, 1):
            ll = -0.5 * (np.log(2 * np.pi * self.var_[c]) + (X - self.mean_[c]) ** 2 / self.var_[c])
            out[:, c] = self.log_prior_[c] + ll.sum(axis=1)
        return out

    def predict_proba(self, X) -> np.ndarray:
        jll = self._joint_log_likelihood(X)
        return np.exp(jll[:, 1] - logsumexp(jll, axis=1))
