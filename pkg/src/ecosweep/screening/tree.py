"""CART regression tree for threshold identification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from ecosweep.errors import EmptyDesignError
from ecosweep.runner import Dataset


@dataclass
class TreeNode:
    leaf_mean: float
    leaf_count: int
    sse: float
    split_dim: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.split_dim is None

    def to_dict(self, names=None) -> dict:
        d = {"mean": self.leaf_mean, "count": self.leaf_count}
        if not self.is_leaf:
            d["split"] = {
                "dim": self.split_dim if names is None else names[self.split_dim],
                "threshold": self.threshold,
            }
            d["left"] = self.left.to_dict(names)
            d["right"] = self.right.to_dict(names)
        return d


def _best_split(X: np.ndarray, y: np.ndarray, min_leaf: int):
    """Best (dim, threshold) by SSE reduction; None when no valid split exists.

    Candidates are midpoints between consecutive distinct sorted values.
    Scanning dims in index order and thresholds ascending with a strict
    improvement test makes ties resolve to the lowest (dim, threshold).
    """
    n = len(y)
    parent_sse = float(np.sum((y - y.mean()) ** 2))
    best = None
    best_gain = 0.0
    for dim in range(X.shape[1]):
        order = np.argsort(X[:, dim], kind="stable")
        xs = X[order, dim]
        ys = y[order]
        csum = np.cumsum(ys)
        csq = np.cumsum(ys ** 2)
        total_sum = csum[-1]
        total_sq = csq[-1]
        for i in range(min_leaf - 1, n - min_leaf):
            if xs[i + 1] <= xs[i]:
                continue
            nl = i + 1
            nr = n - nl
            sse_l = csq[i] - csum[i] ** 2 / nl
            sse_r = (total_sq - csq[i]) - (total_sum - csum[i]) ** 2 / nr
            gain = parent_sse - sse_l - sse_r
            if gain > best_gain + 1e-12:
                best_gain = gain
                best = (dim, (xs[i] + xs[i + 1]) / 2.0)
    return best


def _grow(X, y, depth, max_depth, min_leaf) -> TreeNode:
    node = TreeNode(
        leaf_mean=float(y.mean()),
        leaf_count=len(y),
        sse=float(np.sum((y - y.mean()) ** 2)),
    )
    if max_depth is not None and depth >= max_depth:
        return node
    if len(y) < 2 * min_leaf or node.sse <= 0.0:
        return node
    split = _best_split(X, y, min_leaf)
    if split is None:
        return node
    dim, threshold = split
    mask = X[:, dim] <= threshold
    node.split_dim = dim
    node.threshold = float(threshold)
    node.left = _grow(X[mask], y[mask], depth + 1, max_depth, min_leaf)
    node.right = _grow(X[~mask], y[~mask], depth + 1, max_depth, min_leaf)
    return node


class RegressionTree(BaseEstimator, RegressorMixin):
    """Greedy SSE-minimizing binary regression tree with deterministic ties."""

    def __init__(self, max_depth=4, min_leaf=20):
        self.max_depth = max_depth
        self.min_leaf = min_leaf

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if len(y) == 0:
            raise EmptyDesignError("cannot fit a tree on an empty dataset")
        self.n_features_in_ = X.shape[1]
        self.tree_ = _grow(X, y, 0, self.max_depth, max(1, self.min_leaf))
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        out = np.empty(len(X))
        for i, row in enumerate(X):
            node = self.tree_
            while not node.is_leaf:
                node = node.left if row[node.split_dim] <= node.threshold else node.right
            out[i] = node.leaf_mean
        return out


def fit_tree(ds: Dataset, max_depth=4, min_leaf=20) -> tuple[RegressionTree, np.ndarray, np.ndarray]:
    """Fit the threshold tree on per-config mean scores.

    Returns (fitted estimator, config parameter matrix, mean scores).
    """
    ids, rows = ds.config_matrix()
    means = np.array([ds.scores[ds.config_ids == cid].mean() for cid in ids])
    est = RegressionTree(max_depth=max_depth, min_leaf=min_leaf).fit(rows, means)
    return est, rows, means


@dataclass(frozen=True)
class ThresholdRule:
    conditions: tuple[tuple[str, str, float], ...]   # (dim name, '<=' or '>', threshold)
    leaf_mean: float
    leaf_count: int
    effect_mass: float

    def condition_text(self) -> str:
        if not self.conditions:
            return "(always)"
        return " and ".join(f"{d} {op} {thr:.4g}" for d, op, thr in self.conditions)


def extract_thresholds(tree: TreeNode, names) -> list[ThresholdRule]:
    """Root-to-leaf rules ranked by |leaf mean - global mean| x leaf count."""
    global_mean = tree.leaf_mean
    rules: list[ThresholdRule] = []

    def walk(node: TreeNode, conds):
        if node.is_leaf:
            mass = abs(node.leaf_mean - global_mean) * node.leaf_count
            rules.append(ThresholdRule(tuple(conds), node.leaf_mean, node.leaf_count, mass))
            return
        name = names[node.split_dim]
        walk(node.left, conds + [(name, "<=", node.threshold)])
        walk(node.right, conds + [(name, ">", node.threshold)])

    walk(tree, [])
    rules.sort(key=lambda r: -r.effect_mass)
    return rules


def format_rules(tree: TreeNode, names, indent: str = "  ") -> str:
    """Indented-text rendering of the fitted tree."""
    lines: list[str] = []

    def walk(node: TreeNode, depth: int, prefix: str):
        pad = indent * depth
        if node.is_leaf:
            lines.append(f"{pad}{prefix}mean={node.leaf_mean:.3f} (n={node.leaf_count})")
            return
        name = names[node.split_dim]
        lines.append(f"{pad}{prefix}split {name} @ {node.threshold:.4g} "
                     f"[mean={node.leaf_mean:.3f}, n={node.leaf_count}]")
        walk(node.left, depth + 1, f"{name} <= {node.threshold:.4g}: ")
        walk(node.right, depth + 1, f"{name} > {node.threshold:.4g}: ")

    walk(tree, 0, "")
    return "\n".join(lines)
