"""Replication sizing from pilot variance via the normal-approximation rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ecosweep.errors import DataError
from ecosweep.runner import Dataset


@dataclass(frozen=True)
class ReplicationReport:
    z: float
    epsilon: float
    per_config_nstar: np.ndarray
    mean_nstar: float
    recommended_n: int
    degenerate: bool    # all-zero variance pilot; effective floor is 1 replicate

    def to_dict(self) -> dict:
        return {
            "z": self.z,
            "epsilon": self.epsilon,
            "per_config_nstar": self.per_config_nstar.tolist(),
            "mean_nstar": self.mean_nstar,
            "recommended_n": self.recommended_n,
            "degenerate": self.degenerate,
        }


def nstar(sigma: float, z: float, epsilon: float) -> float:
    """Required replicate count for a half-width epsilon at confidence z."""
    return (z * sigma / epsilon) ** 2


def required_replicates(ds: Dataset, z: float = 1.96, epsilon: float = 0.1) -> ReplicationReport:
    """Per-config n* = (z * sigma_hat / epsilon)^2 and its mean over configs."""
    if epsilon <= 0:
        raise DataError("epsilon must be > 0")
    counts = ds.replicate_counts()
    if np.any(counts[counts > 0] < 2):
        raise DataError("replication sizing needs >= 2 replicates per config")
    ids = np.unique(ds.config_ids)
    per = np.empty(len(ids))
    for k, cid in enumerate(ids):
        sigma = np.std(ds.scores[ds.config_ids == cid], ddof=1)
        per[k] = nstar(sigma, z, epsilon)
    mean = float(per.mean())
    return ReplicationReport(
        z=z,
        epsilon=epsilon,
        per_config_nstar=per,
        mean_nstar=mean,
        recommended_n=int(round(mean)),
        degenerate=bool(np.all(per == 0.0)),
    )
