"""Stratified group cross-validation keeping replicates of a config together."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ecosweep.errors import DataError
from ecosweep.runner import Dataset
from ecosweep.screening.aleatoric import replicate_median
from ecosweep.surrogate.mlp import MLPSurrogate


@dataclass(frozen=True)
class CvReport:
    fold_accuracies: np.ndarray
    mean_accuracy: float
    confusion: np.ndarray          # rows: true class, cols: predicted
    per_class_recall: np.ndarray

    def to_dict(self) -> dict:
        return {
            "fold_accuracies": self.fold_accuracies.tolist(),
            "mean_accuracy": self.mean_accuracy,
            "confusion": self.confusion.tolist(),
            "per_class_recall": self.per_class_recall.tolist(),
        }


def stratified_group_folds(groups: np.ndarray, strata: np.ndarray, k: int,
                           seed: int = 0) -> list[np.ndarray]:
    """Partition groups into k folds, dealing each stratum round-robin.

    Per fold and stratum the group count deviates from the ideal share by at
    most one.
    """
    if len(groups) < k:
        raise DataError(f"need at least {k} groups for {k} folds, got {len(groups)}")
    rng = np.random.default_rng(seed)
    folds: list[list] = [[] for _ in range(k)]
    start = 0
    for value in np.unique(strata):
        members = groups[strata == value]
        members = members[rng.permutation(len(members))]
        for i, g in enumerate(members):
            folds[(start + i) % k].append(g)
        start += len(members)
    return [np.array(sorted(f)) for f in folds]


def cross_validate(ds: Dataset, k: int = 10, cv_seed: int = 0,
                   **mlp_kwargs) -> CvReport:
    """Grouped k-fold CV of the surrogate over held-out runs.

    Groups are config_ids (replicates never straddle train/test) and folds
    are stratified on each config's replicate-median label.
    """
    ids, rows = ds.config_matrix()
    med_scores = np.array([replicate_median(ds.scores[ds.config_ids == cid]) for cid in ids])
    strata = (med_scores * 2).astype(int)
    folds = stratified_group_folds(ids, strata, k, seed=cv_seed)

    y_all = (ds.scores * 2).astype(int)
    n_classes = mlp_kwargs.pop("n_classes", 3)
    bounds = mlp_kwargs.pop("bounds", ds.space.bounds())

    accs = np.empty(k)
    confusion = np.zeros((n_classes, n_classes), dtype=int)
    for fi, test_ids in enumerate(folds):
        test_mask = np.isin(ds.config_ids, test_ids)
        model = MLPSurrogate(n_classes=n_classes, bounds=bounds, **mlp_kwargs)
        model.fit(ds.params[~test_mask], y_all[~test_mask])
        pred = model.predict(ds.params[test_mask])
        truth = y_all[test_mask]
        accs[fi] = np.mean(pred == truth)
        for t, p in zip(truth, pred):
            confusion[t, p] += 1

    row_sums = confusion.sum(axis=1)
    recall = np.divide(np.diag(confusion), row_sums,
                       out=np.zeros(n_classes, dtype=float), where=row_sums > 0)
    return CvReport(
        fold_accuracies=accs,
        mean_accuracy=float(accs.mean()),
        confusion=confusion,
        per_class_recall=recall,
    )
