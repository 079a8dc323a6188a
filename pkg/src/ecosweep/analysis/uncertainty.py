"""Dual-forest conformal decomposition of aleatoric and epistemic uncertainty.

Per-config targets are derived from replicates first: the mean coexistence
indicator p-hat and its replicate standard deviation s.  Forest A regresses
p-hat; its held-out calibration residuals give a split-conformal half-width
(the epistemic band).  Forest B regresses s, giving the aleatoric field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.ensemble import RandomForestRegressor

from ecosweep.errors import DataError
from ecosweep.runner import Dataset


def combine_sigmas(sigma_aleatoric, sigma_epistemic):
    """Total uncertainty under independent variance addition."""
    sa = np.asarray(sigma_aleatoric, dtype=float)
    se = np.asarray(sigma_epistemic, dtype=float)
    return np.sqrt(sa ** 2 + se ** 2)


@dataclass(frozen=True)
class UncertaintyField:
    grid_points: np.ndarray
    sigma_aleatoric: np.ndarray
    sigma_epistemic: np.ndarray
    sigma_total: np.ndarray
    alpha: float

    def __post_init__(self):
        if np.any(self.sigma_aleatoric < 0) or np.any(self.sigma_epistemic < 0):
            raise DataError("sigmas must be non-negative")


def config_targets(ds: Dataset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(config params, coexistence-share p-hat, replicate std of the indicator)."""
    counts = ds.replicate_counts()
    if np.any(counts[counts > 0] < 2):
        raise DataError("uncertainty decomposition needs >= 2 replicates per config")
    ids, rows = ds.config_matrix()
    p_hat = np.empty(len(ids))
    s = np.empty(len(ids))
    for k, cid in enumerate(ids):
        coexist = (ds.scores[ds.config_ids == cid] == 1.0).astype(float)
        p_hat[k] = coexist.mean()
        s[k] = coexist.std(ddof=1)
    return rows, p_hat, s


class UncertaintyDecomposition(BaseEstimator):
    """Fit the dual forests plus the split-conformal epistemic half-width."""

    def __init__(self, alpha=0.1, n_trees=200, min_leaf=5, calib_fraction=0.25,
                 min_calib=10, seed=0):
        self.alpha = alpha
        self.n_trees = n_trees
        self.min_leaf = min_leaf
        self.calib_fraction = calib_fraction
        self.min_calib = min_calib
        self.seed = seed

    def _forest(self, offset: int) -> RandomForestRegressor:
        d = self.n_features_in_
        return RandomForestRegressor(
            n_estimators=self.n_trees,
            max_depth=None,
            min_samples_leaf=self.min_leaf,
            max_features=max(1, int(np.ceil(d / 3))),
            bootstrap=True,
            random_state=self.seed + offset,
        )

    def fit(self, X, p_hat, s):
        X = np.asarray(X, dtype=float)
        p_hat = np.asarray(p_hat, dtype=float)
        s = np.asarray(s, dtype=float)
        n = len(X)
        self.n_features_in_ = X.shape[1]
        n_calib = int(round(self.calib_fraction * n))
        if n_calib < self.min_calib or n - n_calib < 2:
            raise DataError(
                f"calibration split of {n_calib} from {n} configs is too small "
                f"(need >= {self.min_calib} calibration and >= 2 training configs)")
        rng = np.random.default_rng(self.seed)
        perm = rng.permutation(n)
        calib_idx = perm[:n_calib]
        train_idx = perm[n_calib:]

        self.forest_mean_ = self._forest(0).fit(X[train_idx], p_hat[train_idx])
        residuals = np.abs(p_hat[calib_idx] - self.forest_mean_.predict(X[calib_idx]))
        rank = int(np.ceil((1.0 - self.alpha) * (n_calib + 1)))
        rank = min(rank, n_calib)
        self.epistemic_halfwidth_ = float(np.sort(residuals)[rank - 1])

        self.forest_std_ = self._forest(1).fit(X, s)
        self.n_calibration_ = n_calib
        return self

    def predict(self, X) -> UncertaintyField:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        sigma_a = np.maximum(0.0, self.forest_std_.predict(X))
        sigma_e = np.full(len(X), self.epistemic_halfwidth_)
        return UncertaintyField(
            grid_points=X,
            sigma_aleatoric=sigma_a,
            sigma_epistemic=sigma_e,
            sigma_total=combine_sigmas(sigma_a, sigma_e),
            alpha=self.alpha,
        )

    def predict_mean(self, X) -> np.ndarray:
        return self.forest_mean_.predict(np.atleast_2d(np.asarray(X, dtype=float)))


def fit_uncertainty(ds: Dataset, alpha: float = 0.1, **hyper) -> UncertaintyDecomposition:
    """Convenience wrapper: derive per-config targets from *ds* and fit."""
    X, p_hat, s = config_targets(ds)
    return UncertaintyDecomposition(alpha=alpha, **hyper).fit(X, p_hat, s)
