"""Aleatoric accuracy limit from replicate agreement with group medians."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ecosweep.runner import Dataset


@dataclass(frozen=True)
class AleatoricReport:
    acc_max: float
    per_config_agreement: np.ndarray   # fraction of replicates matching the median
    group_medians: np.ndarray          # per-config median score
    config_ids: np.ndarray

    def to_dict(self) -> dict:
        return {
            "acc_max": self.acc_max,
            "per_config_agreement": self.per_config_agreement.tolist(),
            "group_medians": self.group_medians.tolist(),
            "config_ids": self.config_ids.tolist(),
        }


def replicate_median(scores: np.ndarray) -> float:
    """Median of replicate scores, resolved onto the {0, 0.5, 1} grid.

    For an even count the two central values would average off-grid, so the
    lower central value is taken instead.
    """
    s = np.sort(np.asarray(scores, dtype=float))
    n = len(s)
    if n == 0:
        raise ValueError("empty replicate group")
    if n % 2 == 1:
        return float(s[n // 2])
    return float(s[n // 2 - 1])


def bayes_limit(ds: Dataset) -> AleatoricReport:
    """Best achievable accuracy of any deterministic predictor of single runs.

    The oracle predicts each configuration's replicate median; the limit is
    the fraction of individual runs that agree with it.
    """
    ids = np.unique(ds.config_ids)
    counts = ds.replicate_counts()
    if np.all(counts[counts > 0] == 1):
        warnings.warn("single replicate per config: acc_max is degenerately 1")
    medians = np.empty(len(ids))
    agreement = np.empty(len(ids))
    hits = 0
    for k, cid in enumerate(ids):
        group = ds.scores[ds.config_ids == cid]
        med = replicate_median(group)
        medians[k] = med
        match = np.sum(group == med)
        agreement[k] = match / len(group)
        hits += match
    return AleatoricReport(
        acc_max=float(hits / len(ds)),
        per_config_agreement=agreement,
        group_medians=medians,
        config_ids=ids,
    )
