"""Seeded model training and evaluation utilities.

The trainer is a plain gradient-descent logistic regression with backtracking
line search; the same minimizer is reused by the fairness-penalty trainer in
the mitigation module, which supplies its own objective.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FittedModelInfo
from .errors import BadFraction, DimensionMismatch, Divergence, LengthMismatch, NonFinite

LOSS_NAME = "neg_log_likelihood_l2"


@dataclass
class SplitSpec:
    seed: int
    test_fraction: float = 0.5


def split_train_test(n_rows: int, spec: SplitSpec):
    """Deterministic shuffle-then-prefix split; test set takes round(n * fraction)."""
    if not (0.0 < spec.test_fraction < 1.0):
        raise BadFraction(f"test_fraction must be in (0,1), got {spec.test_fraction}")
    if n_rows < 2:
        raise BadFraction("need at least 2 rows to split")
    perm = np.random.default_rng(spec.seed).permutation(n_rows)
    n_test = int(round(n_rows * spec.test_fraction))
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=float)))


def nll_loss_grad(beta, X1, y, w, l2):
    """Weighted mean negative log-likelihood with l2 on non-intercept coefficients.

    X1 carries the intercept column at position 0.
    """
    z = X1 @ beta
    p = sigmoid(z)
    wsum = w.sum()
    nll = float(np.sum(w * (np.logaddexp(0.0, z) - y * z)) / wsum)
    reg = beta.copy()
    reg[0] = 0.0
    loss = nll + l2 * float(reg @ reg)
    grad = X1.T @ (w * (p - y)) / wsum + 2.0 * l2 * reg
    return loss, grad


def minimize_gd(loss_grad, beta0, max_iter=500, tol=1e-5):
    """Gradient descent with Armijo backtracking; stops at grad inf-norm < tol.

    Returns (beta, loss, n_iter, converged).
    """
    beta = np.asarray(beta0, dtype=float).copy()
    loss, grad = loss_grad(beta)
    step = 1.0
    increases = 0
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        gnorm2 = float(grad @ grad)
        if np.max(np.abs(grad)) < tol:
            n_iter -= 1
            return beta, loss, n_iter, True
        accepted = False
        for _ in range(60):
            candidate = beta - step * grad
            new_loss, new_grad = loss_grad(candidate)
            if np.isfinite(new_loss) and new_loss <= loss - 1e-4 * step * gnorm2:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            return beta, loss, n_iter, False
        increases = increases + 1 if new_loss > loss else 0
        if increases >= 10:
            raise Divergence("loss increased across 10 consecutive accepted steps")
        beta, loss, grad = candidate, new_loss, new_grad
        step = min(step * 2.0, 1e6)
    return beta, loss, n_iter, False


def _with_intercept(X):
    X = np.asarray(X, dtype=float)
    return np.hstack([np.ones((X.shape[0], 1)), X])


def train_logreg(X, y, weights=None, max_iter=500, tol=1e-5, l2=1e-6) -> FittedModelInfo:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        raise NonFinite("training inputs contain non-finite values")
    if weights is None:
        weights = np.ones(X.shape[0])
    w = np.asarray(weights, dtype=float)
    if w.shape[0] != X.shape[0] or y.shape[0] != X.shape[0]:
        raise LengthMismatch("X, y, and weights must have equal length")
    X1 = _with_intercept(X)
    beta0 = np.zeros(X1.shape[1])
    beta, loss, n_iter, converged = minimize_gd(
        lambda b: nll_loss_grad(b, X1, y, w, l2), beta0, max_iter=max_iter, tol=tol
    )
    return FittedModelInfo(
        loss_name=LOSS_NAME,
        loss_value=loss,
        tuning_params={"max_iter": max_iter, "tol": tol, "l2": l2, "n_iter": n_iter, "converged": converged},
        model_params={"intercept": float(beta[0]), "coef": [float(b) for b in beta[1:]]},
    )


def predict(model: FittedModelInfo, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    coef = np.asarray(model.model_params["coef"], dtype=float)
    if X.shape[1] != coef.shape[0]:
        raise DimensionMismatch(f"model has {coef.shape[0]} coefficients, data has {X.shape[1]} columns")
    return sigmoid(X @ coef + model.model_params["intercept"])


def classify(scores, t: float = 0.5) -> np.ndarray:
    return (np.asarray(scores, dtype=float) >= t).astype(int)


def accuracy(pred, y) -> float:
    pred = np.asarray(pred)
    y = np.asarray(y)
    if pred.shape[0] != y.shape[0]:
        raise LengthMismatch("prediction and truth vectors differ in length")
    return float(np.mean(pred == y))
