"""Mechanized bias detection.

Detectors take plain pandas objects and return a DetectionReport; they never
mutate project state. The canonical function-name strings recorded in bias
histories are module constants (SAMP_PROPORTION etc.).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import stats

from .core import SiftData, set_sens_features_summary
from .errors import ConstantColumn, EmptyGroup, SchemaMismatch

SAMP_PROPORTION = "computeSampProportion"
CHI_SQ_TEST = "computeChiSqTest"
DISP_IMPACT = "computeDispImpact"
COVARIATE_SHIFT = "detectCovariateShift"


@dataclass
class FairnessRange:
    lower: float
    upper: float

    def __post_init__(self):
        if not (0 < self.lower < self.upper):
            raise ValueError(f"fairness range requires 0 < lower < upper, got ({self.lower}, {self.upper})")

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def to_tuple(self):
        return (self.lower, self.upper)


@dataclass
class DetectionReport:
    metric_name: str
    per_feature: dict = field(default_factory=dict)  # feature -> {value, flagged, groups}
    params: dict = field(default_factory=dict)

    @property
    def flagged(self) -> bool:
        return any(entry["flagged"] for entry in self.per_feature.values())

    def flagged_features(self) -> list:
        return [f for f, entry in self.per_feature.items() if entry["flagged"]]

    def to_dict(self) -> dict:
        return {
            "metric_name": self.metric_name,
            "per_feature": self.per_feature,
            "params": self.params,
            "flagged": self.flagged,
        }


def compute_samp_proportion(data: pd.DataFrame, sens_features, min_prop: float = 0.10) -> DetectionReport:
    """Flag sensitive-feature levels below the minimum sample proportion.

    A level sitting exactly at min_prop is acceptable (the bound is inclusive).
    """
    report = DetectionReport(SAMP_PROPORTION, params={"min_prop": min_prop})
    for feature in sens_features:
        counts = data[feature].value_counts(dropna=False)
        if len(counts) < 2:
            raise ConstantColumn(f"sensitive column {feature!r} has a single level")
        props = counts / counts.sum()
        sparse = [str(level) for level, p in props.items() if p < min_prop]
        report.per_feature[feature] = {
            "value": float(props.min()),
            "flagged": bool(sparse),
            "groups": sparse,
            "proportions": {str(k): float(v) for k, v in props.items()},
        }
    return report


def chi_square_stat(table: np.ndarray):
    """Pearson chi-square statistic, dof, and Cramér's V for a contingency table.

    Rows/columns summing to zero must be removed by the caller.
    """
    table = np.asarray(table, dtype=float)
    n = table.sum()
    row = table.sum(axis=1, keepdims=True)
    col = table.sum(axis=0, keepdims=True)
    expected = row @ col / n
    stat = float(((table - expected) ** 2 / expected).sum())
    r, c = table.shape
    dof = (r - 1) * (c - 1)
    k = min(r - 1, c - 1)
    v = math.sqrt(stat / (n * k)) if k > 0 else 0.0
    return stat, dof, v


def compute_chi_sq_test(
    data: pd.DataFrame,
    sens_features,
    candidate_features,
    alpha: float = 0.01,
    v_min: float = 0.5,
    sift_data: SiftData | None = None,
    n_bins: int = 10,
) -> DetectionReport:
    """Pairwise proxy-feature detection.

    A candidate is a proxy for a sensitive feature iff the Pearson chi-square
    p-value clears the Bonferroni-corrected threshold alpha/m AND Cramér's V is
    at least v_min. Continuous candidates are pre-binned into deciles.
    Degenerate contingency tables (all-zero row/column after construction) are
    skipped with a warning in the report params.
    """
    m = len(candidate_features)
    if m < 1:
        raise ValueError("need at least one candidate feature")
    threshold = alpha / m
    report = DetectionReport(
        CHI_SQ_TEST,
        params={"alpha": alpha, "m": m, "p_threshold": threshold, "v_min": v_min, "warnings": []},
    )
    binned = {}
    for cand in candidate_features:
        col = data[cand]
        if pd.api.types.is_numeric_dtype(col) and col.nunique() > n_bins:
            binned[cand] = pd.qcut(col, n_bins, duplicates="drop")
        else:
            binned[cand] = col
    for sens in sens_features:
        proxies, pairs = [], {}
        max_v = 0.0
        for cand in candidate_features:
            table = pd.crosstab(data[sens], binned[cand]).to_numpy(dtype=float)
            table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
            if table.shape[0] < 2 or table.shape[1] < 2:
                report.params["warnings"].append(
                    f"degenerate contingency table for ({sens}, {cand}); pair skipped"
                )
                continue
            stat, dof, v = chi_square_stat(table)
            p = float(stats.chi2.sf(stat, dof))
            pairs[cand] = {"chi2": stat, "dof": dof, "p_value": p, "cramers_v": v}
            max_v = max(max_v, v)
            if p < threshold and v >= v_min:
                proxies.append(cand)
        report.per_feature[sens] = {
            "value": max_v,
            "flagged": bool(proxies),
            "groups": proxies,
            "pairs": pairs,
        }
        if sift_data is not None:
            set_sens_features_summary(sift_data, "proxy_features", sens, proxies)
    return report


def group_positive_rates(outcome, sens_feature, positive_label=1) -> dict:
    outcome = np.asarray(outcome)
    groups = np.asarray(sens_feature)
    if outcome.shape[0] != groups.shape[0]:
        raise ValueError("outcome and sensitive feature must have equal length")
    rates = {}
    for g in pd.unique(groups):
        mask = groups == g
        if not mask.any():
            raise EmptyGroup(f"group {g!r} is empty")
        rates[g] = float(np.mean(outcome[mask] == positive_label))
    return rates


def compute_disp_impact(outcome, sens_feature, positive_label=1, privileged=None) -> float:
    """Ratio of group positive-outcome rates; 1.0 is parity.

    Default (no privileged group) is the symmetric min-rate/max-rate form in
    [0, 1]. With an explicit privileged label, returns unprivileged/privileged.
    A zero denominator yields +inf (maximally biased marker).
    """
    rates = group_positive_rates(outcome, sens_feature, positive_label)
    if len(rates) < 2:
        raise EmptyGroup("disparate impact needs at least two groups")
    if privileged is not None:
        if privileged not in rates:
            raise EmptyGroup(f"privileged group {privileged!r} not present")
        r_priv = rates[privileged]
        r_unpriv = min(v for g, v in rates.items() if g != privileged)
        if r_priv == 0.0:
            return math.inf
        return r_unpriv / r_priv
    lo, hi = min(rates.values()), max(rates.values())
    if hi == 0.0:
        return math.inf
    return lo / hi


def detect_marginalized_groups(
    sift_data: SiftData,
    fairness_range: FairnessRange,
    positive_label=1,
) -> DetectionReport:
    """Disparate impact of the target variable against each sensitive feature."""
    data = sift_data.raw_data
    y = data[sift_data.y]
    report = DetectionReport(
        DISP_IMPACT, params={"target": sift_data.y, "fairness_range": fairness_range.to_tuple()}
    )
    for sens in sift_data.sens_features:
        rates = group_positive_rates(y, data[sens], positive_label)
        di = compute_disp_impact(y, data[sens], positive_label)
        flagged = not fairness_range.contains(di)
        marginalized = [str(min(rates, key=rates.get))] if flagged else []
        report.per_feature[sens] = {
            "value": di,
            "flagged": flagged,
            "groups": marginalized,
            "rates": {str(k): v for k, v in rates.items()},
        }
        set_sens_features_summary(sift_data, "marginalized_groups", sens, marginalized)
    return report


def ks_statistic(a, b) -> float:
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    everything = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, everything, side="right") / a.size
    cdf_b = np.searchsorted(b, everything, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def kolmogorov_sf(lam: float, tol: float = 1e-10) -> float:
    """Asymptotic Kolmogorov survival function Q(lam) = 2 sum (-1)^(k-1) exp(-2 k^2 lam^2)."""
    if lam <= 0:
        return 1.0
    total = 0.0
    for k in range(1, 1000):
        term = 2.0 * (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
        total += term
        if abs(term) < tol:
            break
    return min(max(total, 0.0), 1.0)


def ks_two_sample(a, b):
    """Two-sample KS test with the asymptotic p-value approximation."""
    d = ks_statistic(a, b)
    n1, n2 = len(a), len(b)
    ne = n1 * n2 / (n1 + n2)
    sqrt_ne = math.sqrt(ne)
    lam = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d
    return d, kolmogorov_sf(lam)


def _two_mean_z_test(mean_cur, sd_cur, n_cur, mean_prior, sd_prior, n_prior) -> float:
    se = math.sqrt(sd_cur**2 / n_cur + sd_prior**2 / n_prior)
    if se == 0.0:
        return 1.0 if mean_cur == mean_prior else 0.0
    z = (mean_cur - mean_prior) / se
    return float(2.0 * stats.norm.sf(abs(z)))


def _is_numeric(col: pd.Series) -> bool:
    return pd.api.types.is_numeric_dtype(col) and not pd.api.types.is_bool_dtype(col)


def detect_covariate_shift(current: pd.DataFrame, prior, alpha: float = 0.05) -> DetectionReport:
    """Per-column distribution comparison between current data and prior data.

    ``prior`` is either a DataFrame or a summary mapping: column ->
    {"mean", "sd", "n"} for numeric columns or {"proportions", "n"} for
    categorical ones. Schema changes (column added/removed, new category
    level) are flagged unconditionally; distributional shifts are flagged at
    the Bonferroni-corrected level alpha / (number of shared columns).
    """
    summary_mode = isinstance(prior, dict)
    prior_cols = set(prior.keys()) if summary_mode else set(prior.columns)
    cur_cols = set(current.columns)
    shared = sorted(cur_cols & prior_cols)
    if not shared:
        raise SchemaMismatch("current and prior data share no columns")
    report = DetectionReport(
        COVARIATE_SHIFT,
        params={"alpha": alpha, "n_columns": len(shared), "summary_mode": summary_mode},
    )
    threshold = alpha / len(shared)
    for col in sorted(cur_cols - prior_cols):
        report.per_feature[col] = {"value": 0.0, "flagged": True, "groups": ["column added"]}
    for col in sorted(prior_cols - cur_cols):
        report.per_feature[col] = {"value": 0.0, "flagged": True, "groups": ["column removed"]}
    for col in shared:
        cur = current[col].dropna()
        notes = []
        if summary_mode:
            info = prior[col]
            if "mean" in info:
                p = _two_mean_z_test(
                    float(cur.mean()), float(cur.std(ddof=1)), len(cur),
                    float(info["mean"]), float(info["sd"]), int(info["n"]),
                )
            else:
                prior_props = dict(info["proportions"])
                cur_counts = cur.value_counts()
                new_levels = [str(v) for v in cur_counts.index if str(v) not in prior_props]
                notes = [f"new category: {v}" for v in new_levels]
                expected = np.array([prior_props.get(str(v), 0.0) * len(cur) for v in cur_counts.index])
                keep = expected > 0
                if keep.sum() >= 2:
                    obs = cur_counts.to_numpy(dtype=float)[keep]
                    exp = expected[keep] * obs.sum() / expected[keep].sum()
                    stat = float(((obs - exp) ** 2 / exp).sum())
                    p = float(stats.chi2.sf(stat, keep.sum() - 1))
                else:
                    p = 1.0
        elif _is_numeric(current[col]) and _is_numeric(prior[col]):
            _, p = ks_two_sample(cur.to_numpy(), prior[col].dropna().to_numpy())
        else:
            prior_col = prior[col].dropna()
            new_levels = sorted(set(map(str, cur.unique())) - set(map(str, prior_col.unique())))
            notes = [f"new category: {v}" for v in new_levels]
            table = pd.crosstab(
                np.concatenate([np.zeros(len(cur)), np.ones(len(prior_col))]),
                np.concatenate([cur.astype(str).to_numpy(), prior_col.astype(str).to_numpy()]),
            ).to_numpy(dtype=float)
            table = table[:, table.sum(axis=0) > 0]
            if table.shape[1] < 2:
                p = 1.0
            else:
                stat, dof, _ = chi_square_stat(table)
                p = float(stats.chi2.sf(stat, dof))
        shifted = p < threshold
        report.per_feature[col] = {
            "value": p,
            "flagged": bool(shifted or notes),
            "groups": (["distribution shift"] if shifted else []) + notes,
        }
    return report
