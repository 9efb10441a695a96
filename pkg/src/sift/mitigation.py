"""Named bias mitigation strategies: pre-, in-, and post-processing.

Strategy names in the registry are the exact strings written into
``bias_history.bias_mitigation_function``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .core import FittedModelInfo
from .errors import EmptyCell, UnknownStrategy
from .metrics import FairnessRange, compute_disp_impact
from .model_lab import classify, minimize_gd, nll_loss_grad, predict, sigmoid

REWEIGHING = "reweighing"
FAIR_PENALTY_LOGREG = "fairPenaltyLogReg"
GROUP_THRESHOLDS = "groupThresholds"

LAMBDA_SCHEDULE = (0, 1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024)


@dataclass
class MitigationResult:
    function_name: str
    stage: str  # "pre", "in", or "post"
    artifacts: dict = field(default_factory=dict)
    post_metric: float = float("nan")  # worst-case DI after mitigation
    success: bool = False
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        artifacts = {
            k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.artifacts.items()
        }
        return {
            "function_name": self.function_name,
            "stage": self.stage,
            "artifacts": artifacts,
            "post_metric": self.post_metric,
            "success": self.success,
            "details": self.details,
        }


def reweigh_preprocess(data: pd.DataFrame, sens: str, y: str) -> np.ndarray:
    """Row weights w(s,y) = P(s) P(y) / P(s,y) from empirical frequencies.

    The weighted joint distribution makes the sensitive feature and the target
    exactly independent.
    """
    n = len(data)
    joint = pd.crosstab(data[sens], data[y]) / n
    if (joint == 0).any().any() or joint.size < 4:
        raise EmptyCell("every (sensitive, target) combination needs at least one row")
    p_s = joint.sum(axis=1)
    p_y = joint.sum(axis=0)
    weights = np.empty(n)
    for (s_val, y_val), idx in data.groupby([sens, y]).indices.items():
        weights[idx] = p_s[s_val] * p_y[y_val] / joint.loc[s_val, y_val]
    return weights


def weighted_disp_impact(y, groups, weights, positive_label=1) -> float:
    y = np.asarray(y)
    groups = np.asarray(groups)
    weights = np.asarray(weights, dtype=float)
    rates = []
    for g in pd.unique(groups):
        mask = groups == g
        rates.append(float(np.sum(weights[mask] * (y[mask] == positive_label)) / np.sum(weights[mask])))
    lo, hi = min(rates), max(rates)
    return lo / hi if hi > 0 else float("inf")


def _indicator_matrix(sens_frame: pd.DataFrame) -> np.ndarray:
    """One-hot indicators per sensitive feature, dropping one reference level each."""
    cols = []
    for name in sens_frame.columns:
        levels = sorted(map(str, sens_frame[name].astype(str).unique()))
        for level in levels[:-1]:
            cols.append((sens_frame[name].astype(str) == level).to_numpy(dtype=float))
    return np.column_stack(cols)


def _penalty_loss_grad(beta, X1, y, w, l2, S_centered, lam, n):
    loss, grad = nll_loss_grad(beta, X1, y, w, l2)
    if lam == 0:
        return loss, grad
    p = sigmoid(X1 @ beta)
    cov = S_centered.T @ p / n  # empirical cov(s_j, p); centered s removes the mean term
    loss += lam * float(cov @ cov)
    dp = p * (1.0 - p)
    grad += 2.0 * lam * (X1.T @ ((S_centered * dp[:, None]) @ cov)) / n
    return loss, grad


def fair_penalty_train(
    X_train,
    y_train,
    sens_train: pd.DataFrame,
    X_test,
    sens_test: pd.DataFrame,
    fairness_range: FairnessRange,
    weights=None,
    lambdas=LAMBDA_SCHEDULE,
    max_iter=500,
    tol=1e-5,
    l2=1e-6,
    threshold=0.5,
):
    """Logistic training with an escalating covariance fairness penalty.

    Minimizes weighted log-loss + lambda * sum_j cov(s_j, p)^2 over the lambda
    schedule, stopping at the first lambda whose test-fold DI is inside the
    fairness range for every sensitive feature. Returns (FittedModelInfo,
    MitigationResult); when the schedule exhausts, the max-lambda model is
    returned with success False.
    """
    X_train = np.asarray(X_train, dtype=float)
    X_test = np.asarray(X_test, dtype=float)
    y_train = np.asarray(y_train, dtype=float)
    n = X_train.shape[0]
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    X1 = np.hstack([np.ones((n, 1)), X_train])
    S = _indicator_matrix(sens_train)
    S_centered = S - S.mean(axis=0)

    beta = np.zeros(X1.shape[1])
    best = None
    for lam in lambdas:
        beta, loss, n_iter, converged = minimize_gd(
            lambda b: _penalty_loss_grad(b, X1, y_train, w, l2, S_centered, lam, n),
            beta,  # warm start from the previous lambda
            max_iter=max_iter,
            tol=tol,
        )
        model = FittedModelInfo(
            loss_name="neg_log_likelihood_l2_fair_penalty",
            loss_value=loss,
            tuning_params={
                "lambda": lam, "l2": l2, "max_iter": max_iter, "tol": tol,
                "n_iter": n_iter, "converged": converged,
            },
            model_params={"intercept": float(beta[0]), "coef": [float(b) for b in beta[1:]]},
        )
        pred = classify(predict(model, X_test), threshold)
        dis = {
            name: compute_disp_impact(pred, sens_test[name].to_numpy())
            for name in sens_test.columns
        }
        worst = min(dis.values())
        in_range = all(np.isfinite(v) and fairness_range.contains(v) for v in dis.values())
        best = (model, dis, worst)
        if in_range:
            return model, MitigationResult(
                FAIR_PENALTY_LOGREG, "in",
                artifacts={"model": model.to_dict()},
                post_metric=worst, success=True,
                details={"lambda": lam, "di": {k: float(v) for k, v in dis.items()}},
            )
    model, dis, worst = best
    return model, MitigationResult(
        FAIR_PENALTY_LOGREG, "in",
        artifacts={"model": model.to_dict()},
        post_metric=worst, success=False,
        details={"lambda": lambdas[-1], "di": {k: float(v) for k, v in dis.items()}},
    )


def post_process_thresholds(scores, sens_feature, fairness_range: FairnessRange, y_true=None):
    """Per-group threshold grid search over {0.00, 0.01, ..., 1.00}.

    Among threshold tuples whose DI lands inside the fairness range, picks the
    one maximizing accuracy against y_true (or, absent y_true, minimizing
    sum |t_g - 0.5|); ties broken by distance to 0.5 then lexicographic group
    order. Returns (outcomes, thresholds-by-group, MitigationResult). When no
    tuple is feasible the best-DI tuple is returned with success False.
    """
    scores = np.asarray(scores, dtype=float)
    groups = np.asarray(sens_feature)
    labels = sorted(map(str, pd.unique(groups).tolist()))
    grid = np.round(np.arange(101) / 100.0, 2)
    rates = {}
    corrects = {}
    sizes = {}
    for g in labels:
        mask = groups.astype(str) == g
        s = scores[mask]
        sizes[g] = int(mask.sum())
        pred = s[None, :] >= grid[:, None]  # (101, n_g)
        rates[g] = pred.mean(axis=1)
        if y_true is not None:
            yt = np.asarray(y_true)[mask]
            corrects[g] = (pred == yt[None, :]).sum(axis=1)

    best_key = None
    best = None
    n_total = sum(sizes.values())
    rate_mat = np.stack([rates[g] for g in labels])  # (G, 101)
    if y_true is not None:
        corr_mat = np.stack([corrects[g] for g in labels])
    for combo in itertools.product(range(101), repeat=len(labels)):
        r = rate_mat[np.arange(len(labels)), list(combo)]
        hi = r.max()
        di = 1.0 if hi == 0.0 else r.min() / hi
        feasible = fairness_range.contains(di)
        ts = grid[list(combo)]
        dist = float(np.round(np.abs(ts - 0.5), 10).sum())
        if y_true is not None:
            util = -float(corr_mat[np.arange(len(labels)), list(combo)].sum()) / n_total
        else:
            util = dist
        # feasible tuples always beat infeasible ones; then utility, tie-breaks
        key = (0 if feasible else 1, util if feasible else -di, dist, tuple(ts))
        if best_key is None or key < best_key:
            best_key = key
            best = (feasible, di, ts)
    feasible, di, ts = best
    thresholds = {g: float(t) for g, t in zip(labels, ts)}
    outcomes = np.zeros(scores.shape[0], dtype=int)
    for g in labels:
        mask = groups.astype(str) == g
        outcomes[mask] = (scores[mask] >= thresholds[g]).astype(int)
    result = MitigationResult(
        GROUP_THRESHOLDS, "post",
        artifacts={"outcomes": outcomes, "thresholds": thresholds},
        post_metric=float(di), success=bool(feasible),
        details={"thresholds": thresholds},
    )
    return outcomes, thresholds, result


@dataclass(frozen=True)
class Strategy:
    name: str
    stage: str
    description: str


_REGISTRY = {
    REWEIGHING: Strategy(REWEIGHING, "pre", "row reweighing to decouple target and sensitive feature"),
    FAIR_PENALTY_LOGREG: Strategy(FAIR_PENALTY_LOGREG, "in", "covariance-penalty logistic training"),
    GROUP_THRESHOLDS: Strategy(GROUP_THRESHOLDS, "post", "per-group decision threshold search"),
}


def lookup(name: str) -> Strategy:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownStrategy(f"no mitigation strategy named {name!r}") from None


def registry_names() -> list:
    return sorted(_REGISTRY)
