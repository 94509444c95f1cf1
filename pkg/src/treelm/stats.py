"""Statistics for the measurement layer: effect sizes, within-item confidence
intervals, sum-coded least-squares with by-item intercepts, permutation tests,
and exact binomial accuracy intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps


class DesignError(ValueError):
    """Rank-deficient or otherwise unusable design; message lists the problem."""


@dataclass(frozen=True)
class CohensD:
    value: float  # +/-inf (or nan at mean 0) when variance is zero
    zero_variance: bool


def cohens_d(values) -> CohensD:
    """Mean over sample standard deviation (n-1 denominator)."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        raise ValueError("cohens_d needs at least 2 values")
    mean = float(arr.mean())
    sd = float(arr.std(ddof=1))
    if sd == 0.0:
        return CohensD(math.copysign(math.inf, mean) if mean != 0 else math.nan, True)
    return CohensD(mean / sd, False)


@dataclass(frozen=True)
class ConditionCI:
    means: dict[str, float]
    half_widths: dict[str, float]


def within_item_ci(table: dict[str, dict[str, float]], confidence: float = 0.95) -> ConditionCI:
    """Per-condition means with within-item confidence intervals.

    Subtracts each item's mean across conditions, adds back the grand mean,
    and intervals the adjusted values with the t distribution (n-1 df).
    Requires a complete item x condition table with at least two items.
    """
    items = sorted(table)
    if len(items) < 2:
        raise DesignError("within-item CI undefined for a single item")
    conditions = sorted(table[items[0]])
    for item in items:
        if sorted(table[item]) != conditions:
            raise DesignError(f"item {item!r} conditions {sorted(table[item])} != {conditions}")
    values = np.array([[table[item][c] for c in conditions] for item in items], dtype=float)
    grand = values.mean()
    adjusted = values - values.mean(axis=1, keepdims=True) + grand
    n = len(items)
    t_crit = float(sps.t.ppf(0.5 + confidence / 2.0, n - 1))
    means = {c: float(adjusted[:, j].mean()) for j, c in enumerate(conditions)}
    halves = {
        c: float(t_crit * adjusted[:, j].std(ddof=1) / math.sqrt(n)) for j, c in enumerate(conditions)
    }
    return ConditionCI(means, halves)


def mean_ci(values, confidence: float = 0.95) -> tuple[float, float]:
    """Plain t-interval on a vector: (mean, half width)."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        raise DesignError("mean CI undefined for fewer than 2 values")
    t_crit = float(sps.t.ppf(0.5 + confidence / 2.0, arr.size - 1))
    return float(arr.mean()), float(t_crit * arr.std(ddof=1) / math.sqrt(arr.size))


@dataclass
class RegressionResult:
    names: list[str]
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    residual_df: int

    def coef(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def p_value(self, name: str) -> float:
        return float(self.p_values[self.names.index(name)])


def sum_coded_regression(
    y,
    condition_columns: dict[str, list[float]],
    item_ids: list | None = None,
) -> RegressionResult:
    """Least squares on sum-coded condition predictors plus an intercept.

    item_ids, when given, add sum-coded by-item intercepts (fixed effects
    standing in for by-item random intercepts). Coefficient p-values are
    two-sided t-tests on the classical standard errors.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    names = ["intercept"]
    columns = [np.ones(n)]
    for name in sorted(condition_columns):
        col = np.asarray(condition_columns[name], dtype=float)
        if col.size != n:
            raise DesignError(f"predictor {name!r} has {col.size} rows, expected {n}")
        names.append(name)
        columns.append(col)
    if item_ids is not None:
        if len(item_ids) != n:
            raise DesignError(f"item_ids has {len(item_ids)} rows, expected {n}")
        levels = sorted(set(item_ids), key=str)
        last = levels[-1]
        for level in levels[:-1]:
            col = np.array([1.0 if i == level else (-1.0 if i == last else 0.0) for i in item_ids])
            names.append(f"item[{level}]")
            columns.append(col)
    x = np.column_stack(columns)
    rank = np.linalg.matrix_rank(x)
    if rank < x.shape[1]:
        aliased = _aliased_columns(x, names)
        raise DesignError(f"rank-deficient design (rank {rank} < {x.shape[1]}); aliased terms: {aliased}")
    coef, _, _, _ = np.linalg.lstsq(x, y, rcond=None)
    residuals = y - x @ coef
    df = n - x.shape[1]
    if df > 0:
        sigma2 = float(residuals @ residuals) / df
        cov = sigma2 * np.linalg.inv(x.T @ x)
        se = np.sqrt(np.diag(cov))
        with np.errstate(divide="ignore", invalid="ignore"):
            t_vals = np.where(se > 0, coef / se, np.inf * np.sign(coef))
        p_vals = 2.0 * sps.t.sf(np.abs(t_vals), df)
    else:
        se = np.zeros_like(coef)
        t_vals = np.full_like(coef, np.inf)
        p_vals = np.zeros_like(coef)
    return RegressionResult(names, coef, se, t_vals, p_vals, df)


def _aliased_columns(x: np.ndarray, names: list[str]) -> list[str]:
    aliased = []
    kept: list[int] = []
    for j in range(x.shape[1]):
        trial = x[:, kept + [j]]
        if np.linalg.matrix_rank(trial) == len(kept) + 1:
            kept.append(j)
        else:
            aliased.append(names[j])
    return aliased


def permutation_test_mean(values, n_shuffles: int = 10_000, seed: int = 0) -> float:
    """Two-sided sign-flip permutation test of mean 0 on paired differences.

    Deterministic given the seed; p = (1 + #{|perm mean| >= |observed|}) /
    (1 + n_shuffles).
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("permutation test needs at least one value")
    observed = abs(arr.mean())
    rng = np.random.default_rng(seed)
    signs = rng.choice((-1.0, 1.0), size=(n_shuffles, arr.size))
    perm_means = np.abs((signs * arr).mean(axis=1))
    hits = int(np.sum(perm_means >= observed - 1e-15))
    return (1 + hits) / (1 + n_shuffles)


@dataclass(frozen=True)
class BinomialSummary:
    successes: int
    n: int
    accuracy: float
    ci_low: float
    ci_high: float
    p_value: float  # exact binomial test against chance 0.5


def binomial_accuracy(successes: int, n: int, confidence: float = 0.95) -> BinomialSummary:
    """Exact (Clopper-Pearson) interval and two-sided test against 0.5."""
    if n <= 0:
        raise ValueError("binomial summary needs n > 0")
    alpha = 1.0 - confidence
    low = 0.0 if successes == 0 else float(sps.beta.ppf(alpha / 2, successes, n - successes + 1))
    high = 1.0 if successes == n else float(sps.beta.ppf(1 - alpha / 2, successes + 1, n - successes))
    p = float(sps.binomtest(successes, n, 0.5).pvalue)
    return BinomialSummary(successes, n, successes / n, low, high, p)
