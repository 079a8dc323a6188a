"""Type II variance decomposition and the seed-independence test."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from ecosweep.errors import DegenerateDesignError
from ecosweep.runner import Dataset
from ecosweep.sim import LABELS


@dataclass(frozen=True)
class FactorEffect:
    name: str
    sum_of_squares: float
    df: int
    variance_share: float
    f_stat: float
    p_value: float


@dataclass(frozen=True)
class AnovaResult:
    per_factor: list[FactorEffect]
    r_squared: float
    residual_share: float

    def ranked(self) -> list[FactorEffect]:
        return sorted(self.per_factor, key=lambda e: -e.variance_share)

    def to_dict(self) -> dict:
        return {
            "per_factor": [
                {
                    "name": e.name,
                    "sum_of_squares": e.sum_of_squares,
                    "df": e.df,
                    "variance_share": e.variance_share,
                    "F": e.f_stat,
                    "p": e.p_value,
                }
                for e in self.per_factor
            ],
            "r_squared": self.r_squared,
            "residual_share": self.residual_share,
        }


def _rss(design: np.ndarray, y: np.ndarray) -> float:
    coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return float(resid @ resid)


def anova_type2(ds: Dataset) -> AnovaResult:
    """OLS of score on the 13 linear levers plus seed as a categorical factor.

    Each factor's sum of squares is the RSS increase from removing it from
    the full model (Type II, main effects only); shares are relative to the
    total sum of squares and the residual share closes the budget to 1.
    """
    y = ds.scores.astype(float)
    n = len(y)
    names = list(ds.space.names)

    for j, name in enumerate(names):
        if len(np.unique(ds.params[:, j])) < 2:
            raise DegenerateDesignError(f"factor {name} has no variation")

    seed_values = np.unique(ds.seeds)
    seed_dummies = []
    for s in seed_values[1:]:
        seed_dummies.append((ds.seeds == s).astype(float))
    seed_block = np.column_stack(seed_dummies) if seed_dummies else np.empty((n, 0))

    X = ds.params.astype(float)
    full = np.column_stack([np.ones(n), X, seed_block])
    if np.linalg.matrix_rank(full) < full.shape[1]:
        raise DegenerateDesignError("design matrix is rank deficient")

    tss = float(np.sum((y - y.mean()) ** 2))
    rss_full = _rss(full, y)
    df_resid = n - full.shape[1]
    if df_resid <= 0:
        raise DegenerateDesignError("more model terms than observations")
    mse = rss_full / df_resid

    effects = []
    blocks = [(name, [1 + j]) for j, name in enumerate(names)]
    if seed_block.shape[1] > 0:
        base = 1 + len(names)
        blocks.append(("seed", list(range(base, base + seed_block.shape[1]))))
    for name, cols in blocks:
        reduced = np.delete(full, cols, axis=1)
        ss = max(0.0, _rss(reduced, y) - rss_full)
        df = len(cols)
        if tss > 0 and mse > 0:
            f_stat = (ss / df) / mse
            p = float(stats.f.sf(f_stat, df, df_resid))
            share = ss / tss
        else:
            f_stat, p, share = 0.0, 1.0, 0.0
        effects.append(FactorEffect(name, ss, df, share, f_stat, p))

    r_squared = 1.0 - rss_full / tss if tss > 0 else 0.0
    residual_share = 1.0 - sum(e.variance_share for e in effects)
    return AnovaResult(per_factor=effects, r_squared=r_squared, residual_share=residual_share)


def chi2_seed_independence(ds: Dataset) -> tuple[float, float]:
    """Pearson chi-squared of the seeds x outcome-label contingency table."""
    seeds = np.unique(ds.seeds)
    if len(seeds) < 2:
        raise DegenerateDesignError("need at least 2 seeds for the independence test")
    labels = list(LABELS)
    table = np.zeros((len(seeds), len(labels)))
    score_to_col = {0.0: 0, 0.5: 1, 1.0: 2}
    for i, s in enumerate(seeds):
        group = ds.scores[ds.seeds == s]
        for sc in group:
            table[i, score_to_col[float(sc)]] += 1
    # Drop labels absent from the whole dataset; df shrinks accordingly.
    present = table.sum(axis=0) > 0
    table = table[:, present]
    if table.shape[1] < 2:
        return 0.0, 1.0
    row = table.sum(axis=1, keepdims=True)
    col = table.sum(axis=0, keepdims=True)
    expected = row @ col / table.sum()
    chi2 = float(np.sum((table - expected) ** 2 / expected))
    df = (table.shape[0] - 1) * (table.shape[1] - 1)
    p = float(stats.chi2.sf(chi2, df))
    return chi2, p
