"""Synthetic marketing dataset: demographics plus simulated consumer segments.

The recipe: take cleaned census-style demographics (age bins, income,
marital status, race, sex), attach five binary consumer segments correlated
with married/male status, forty-five uncorrelated segments, and a binary
target drawn from a logistic model with known coefficients and unit normal
noise.  All randomness flows through numpy's default_rng with a documented
draw order, so a (table, config, seed) triple fully determines the output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import DimensionMismatch, InsufficientRows, SchemaError
from .model_lab import sigmoid

ADULT_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education_num",
    "marital_status", "occupation", "relationship", "race", "sex",
    "capital_gain", "capital_loss", "hours_per_week", "native_country",
    "income",
]

AGE_BINS = ["17-25", "26-35", "36-45", "46-55", "56-65", "66-75", "75+"]

SENS_FEATURES = ["marital_status", "race", "sex"]

_MARRIED = {"Married-civ-spouse", "Married-spouse-absent", "Married-AF-spouse"}


@dataclass
class SimulationConfig:
    seed: int = 0
    n_correlated: int = 5
    n_uncorrelated: int = 45
    beta_low: float = -2.0
    beta_high: float = 2.5
    intercept: float = -0.5
    segment_intercept: float = -1.0
    n_beta_uncorrelated: int = 10
    noise_sd: float = 1.0

    def __post_init__(self):
        if self.n_correlated <= 0 or self.n_uncorrelated <= 0:
            raise SchemaError("segment counts must be positive")
        if self.beta_low >= self.beta_high:
            raise SchemaError("beta_low must be below beta_high")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_correlated": self.n_correlated,
            "n_uncorrelated": self.n_uncorrelated,
            "beta_low": self.beta_low,
            "beta_high": self.beta_high,
            "intercept": self.intercept,
            "segment_intercept": self.segment_intercept,
            "n_beta_uncorrelated": self.n_beta_uncorrelated,
            "noise_sd": self.noise_sd,
        }


@dataclass
class GeneratedDataset:
    X: pd.DataFrame
    y: np.ndarray
    sens: pd.DataFrame
    beta: np.ndarray
    z: np.ndarray
    cfg: SimulationConfig = field(default_factory=SimulationConfig)
    seed: int = 0

    @property
    def n(self) -> int:
        return len(self.X)


def _bin_ages(ages: pd.Series) -> pd.Series:
    bins = [16, 25, 35, 45, 55, 65, 75, np.inf]
    return pd.cut(ages, bins=bins, labels=AGE_BINS)


def load_adult(path) -> pd.DataFrame:
    """Load a raw census-format CSV and reduce it to the modeling schema.

    Rows containing a "?" marker are dropped; age is binned into seven
    one-hot columns; marital status collapses to married/single, race to
    white/non-white, and income to a >50K indicator.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    raw = pd.read_csv(path, header=None, names=ADULT_COLUMNS, skipinitialspace=True,
                      comment="|")
    if raw.shape[1] != len(ADULT_COLUMNS):
        raise SchemaError(f"expected {len(ADULT_COLUMNS)} columns, got {raw.shape[1]}")
    raw = raw.dropna()
    mask = ~raw.astype(str).apply(lambda col: col.str.strip().eq("?")).any(axis=1)
    raw = raw[mask].reset_index(drop=True)
    try:
        ages = raw["age"].astype(int)
    except (TypeError, ValueError) as exc:
        raise SchemaError("age column is not numeric") from exc

    out = pd.DataFrame(index=raw.index)
    bins = _bin_ages(ages)
    for label in AGE_BINS:
        out[f"age_{label}"] = (bins == label).astype(int)
    income = raw["income"].astype(str).str.strip().str.rstrip(".")
    out["income"] = (income == ">50K").astype(int)
    out["marital_status"] = np.where(
        raw["marital_status"].astype(str).str.strip().isin(_MARRIED), "married", "single"
    )
    out["race"] = np.where(raw["race"].astype(str).str.strip() == "White", "white", "non-white")
    out["sex"] = raw["sex"].astype(str).str.strip().str.lower()
    return out


def standin_adult_path() -> Path:
    """Path to the packaged 500-row stand-in file in the raw census layout."""
    return Path(str(resources.files("sift.data") / "adult_standin.csv"))


def synth_demographics(n: int, seed: int) -> pd.DataFrame:
    """Generate a demographics table in the load_adult output schema.

    Marginals approximate a working-age census sample: two-thirds male,
    higher income for married men, mostly white respondents.
    """
    rng = np.random.default_rng(seed)
    ages = rng.integers(17, 91, size=n)
    male = rng.random(n) < 0.67
    white = rng.random(n) < 0.86
    married = rng.random(n) < 0.47
    mid_career = (ages >= 36) & (ages <= 55)
    logit = -2.2 + 1.1 * male + 1.2 * married + 0.4 * white + 0.5 * mid_career
    income = rng.random(n) < sigmoid(logit)

    out = pd.DataFrame()
    bins = _bin_ages(pd.Series(ages))
    for label in AGE_BINS:
        out[f"age_{label}"] = (bins == label).astype(int)
    out["income"] = income.astype(int)
    out["marital_status"] = np.where(married, "married", "single")
    out["race"] = np.where(white, "white", "non-white")
    out["sex"] = np.where(male, "male", "female")
    return out


def simulate_segments(adult: pd.DataFrame, cfg: SimulationConfig, seed: int):
    """Draw the correlated and uncorrelated consumer-segment matrices.

    Draw order from one seeded generator: the uncorrelated base rates first,
    then the correlated matrix row-major, then the uncorrelated matrix
    row-major.
    """
    for col in ("marital_status", "sex"):
        if col not in adult.columns:
            raise SchemaError(f"missing column {col!r}")
    n = len(adult)
    rng = np.random.default_rng(seed)
    p_j = rng.uniform(0.2, 0.8, size=cfg.n_uncorrelated)
    p_tilde = sigmoid(
        cfg.segment_intercept
        + (adult["marital_status"].to_numpy() == "married").astype(float)
        + (adult["sex"].to_numpy() == "male").astype(float)
    )
    c_corr = (rng.random((n, cfg.n_correlated)) < p_tilde[:, None]).astype(int)
    c_unc = (rng.random((n, cfg.n_uncorrelated)) < p_j[None, :]).astype(int)
    return c_corr, c_unc


def feature_columns(cfg: SimulationConfig) -> list:
    return (
        [f"age_{b}" for b in AGE_BINS]
        + ["income"]
        + [f"Cc{j}" for j in range(1, cfg.n_correlated + 1)]
        + [f"Cu{j}" for j in range(1, cfg.n_uncorrelated + 1)]
    )


def simulate_target(X: pd.DataFrame, cfg: SimulationConfig, seed: int):
    """Draw (y, beta, z) for an assembled feature table.

    Coefficients are drawn for income, every correlated segment, and the
    first n_beta_uncorrelated uncorrelated segments (in that order); all
    other coefficients, including the age bins, are exactly zero.  Draw
    order: beta, then the noise vector z, then the target uniforms.
    """
    expected = feature_columns(cfg)
    if list(X.columns) != expected:
        raise DimensionMismatch(
            f"expected columns {expected[:3]}...{expected[-1]} ({len(expected)}), "
            f"got {len(X.columns)}"
        )
    n = len(X)
    rng = np.random.default_rng(seed)
    n_drawn = 1 + cfg.n_correlated + cfg.n_beta_uncorrelated
    drawn = rng.uniform(cfg.beta_low, cfg.beta_high, size=n_drawn)
    beta = np.zeros(len(expected))
    income_at = len(AGE_BINS)
    beta[income_at] = drawn[0]
    beta[income_at + 1 : income_at + 1 + cfg.n_correlated] = drawn[1 : 1 + cfg.n_correlated]
    cu_at = income_at + 1 + cfg.n_correlated
    beta[cu_at : cu_at + cfg.n_beta_uncorrelated] = drawn[1 + cfg.n_correlated :]
    z = rng.normal(0.0, cfg.noise_sd, size=n)
    p_y = sigmoid(cfg.intercept + X.to_numpy(dtype=float) @ beta + z)
    y = (rng.random(n) < p_y).astype(int)
    return y, beta, z


def build_dataset(adult: pd.DataFrame, cfg: SimulationConfig, seed: int) -> GeneratedDataset:
    """Assemble features, target, and sensitive table from a demographics table.

    Segments use the given seed; the target uses seed + 1.
    """
    c_corr, c_unc = simulate_segments(adult, cfg, seed)
    X = pd.DataFrame(index=adult.index)
    for label in AGE_BINS:
        X[f"age_{label}"] = adult[f"age_{label}"].to_numpy()
    X["income"] = adult["income"].to_numpy()
    for j in range(cfg.n_correlated):
        X[f"Cc{j + 1}"] = c_corr[:, j]
    for j in range(cfg.n_uncorrelated):
        X[f"Cu{j + 1}"] = c_unc[:, j]
    y, beta, z = simulate_target(X, cfg, seed + 1)
    sens = adult[SENS_FEATURES].copy()
    return GeneratedDataset(X=X, y=y, sens=sens, beta=beta, z=z, cfg=cfg, seed=seed)


def make_project1_subsample(
    full: GeneratedDataset, seed: int, nonwhite_frac: float = 0.05, n_sub: int = 2000
) -> GeneratedDataset:
    """Stratified subsample with exactly round(nonwhite_frac * n_sub) non-white rows."""
    n_nonwhite = round(nonwhite_frac * n_sub)
    n_white = n_sub - n_nonwhite
    race = full.sens["race"].to_numpy()
    nonwhite_idx = np.flatnonzero(race == "non-white")
    white_idx = np.flatnonzero(race == "white")
    if len(nonwhite_idx) < n_nonwhite or len(white_idx) < n_white:
        raise InsufficientRows(
            f"need {n_nonwhite} non-white and {n_white} white rows, have "
            f"{len(nonwhite_idx)} and {len(white_idx)}"
        )
    rng = np.random.default_rng(seed)
    chosen = np.sort(
        np.concatenate(
            [
                rng.choice(nonwhite_idx, size=n_nonwhite, replace=False),
                rng.choice(white_idx, size=n_white, replace=False),
            ]
        )
    )
    return GeneratedDataset(
        X=full.X.iloc[chosen].reset_index(drop=True),
        y=full.y[chosen],
        sens=full.sens.iloc[chosen].reset_index(drop=True),
        beta=full.beta,
        z=full.z[chosen],
        cfg=full.cfg,
        seed=seed,
    )


def export_dataset(ds: GeneratedDataset, path) -> None:
    """Write the dataset as CSV plus a sidecar JSON with config, seed, and beta."""
    path = Path(path)
    table = pd.concat([ds.X, ds.sens, pd.Series(ds.y, name="y")], axis=1)
    table.to_csv(path, index=False)
    sidecar = {"cfg": ds.cfg.to_dict(), "seed": ds.seed, "beta": ds.beta.tolist()}
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar, indent=2))
