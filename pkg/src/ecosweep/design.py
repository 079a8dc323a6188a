"""Space-filling replicated designs over a parameter space."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ecosweep.errors import EmptyDesignError, InvalidSpaceError, SchemaError
from ecosweep.provenance import (
    fmt_float,
    provenance_dict,
    read_csv,
    read_json,
    write_csv,
    write_json,
)
from ecosweep.space import ParameterSpace

LHS_VARIANT = "random-within-stratum"


@dataclass(frozen=True)
class Design:
    """Sampled configuration points plus the provenance needed to re-derive them."""

    points: np.ndarray          # (n, ndim) float64
    design_seed: int
    space: ParameterSpace

    def __post_init__(self):
        if self.points.ndim != 2 or self.points.shape[1] != self.space.ndim:
            raise InvalidSpaceError("design points do not match the space dimensionality")
        if len(np.unique(self.points, axis=0)) != len(self.points):
            raise InvalidSpaceError("design points must be pairwise distinct")

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def replicates_per_point(self) -> int:
        return len(self.space.seed_levels)


def lhs_sample(space: ParameterSpace, n: int, design_seed: int) -> Design:
    """Latin hypercube sample: one point per equal-width stratum per dimension.

    Strata positions are uniform random and the per-dimension permutations are
    independent; the output is reproducible for a fixed ``design_seed``.
    """
    if space.ndim == 0:
        raise InvalidSpaceError("cannot sample an empty space")
    if n < 1:
        raise EmptyDesignError(f"sample size must be >= 1, got {n}")
    rng = np.random.default_rng(design_seed)
    lower, upper = space.bounds()
    points = np.empty((n, space.ndim), dtype=float)
    for j in range(space.ndim):
        strata = rng.permutation(n)
        jitter = rng.random(n)
        unit = (strata + jitter) / n
        points[:, j] = lower[j] + unit * (upper[j] - lower[j])
    return Design(points=points, design_seed=design_seed, space=space)


def expand_replicates(design: Design, seeds=None) -> list[tuple[int, np.ndarray, int]]:
    """Cartesian product points x seeds in config-major order."""
    if seeds is None:
        seeds = design.space.seed_levels
    seeds = list(seeds)
    if not seeds:
        raise EmptyDesignError("seed list must be non-empty")
    rows = []
    for config_id in range(design.n_points):
        point = design.points[config_id]
        for seed in seeds:
            rows.append((config_id, point, int(seed)))
    return rows


def save_design(design: Design, path, seeds=None) -> None:
    """Write the replicated design CSV plus its metadata sidecar."""
    path = Path(path)
    if seeds is None:
        seeds = design.space.seed_levels
    rows = expand_replicates(design, seeds)
    header = ["config_id", "seed"] + list(design.space.names)
    meta = {
        "space": design.space.to_dict(),
        "n_points": design.n_points,
        "seeds": [int(s) for s in seeds],
        "design_seed": design.design_seed,
        "lhs_variant": LHS_VARIANT,
    }
    prov = provenance_dict(meta, seeds=seeds)
    csv_rows = [
        [str(config_id), str(seed)] + [fmt_float(v) for v in point]
        for config_id, point, seed in rows
    ]
    write_csv(path, header, csv_rows, prov)
    meta["provenance"] = prov
    write_json(sidecar_path(path), meta)


def sidecar_path(path) -> Path:
    return Path(str(path) + ".meta.json")


def load_design(path) -> tuple[Design, list[tuple[int, np.ndarray, int]]]:
    """Read a design CSV + sidecar back into a Design and its replicate rows."""
    path = Path(path)
    meta_file = sidecar_path(path)
    if not meta_file.exists():
        raise SchemaError(f"design sidecar {meta_file} is missing")
    meta = read_json(meta_file)
    space = ParameterSpace.from_dict(meta["space"])
    _, header, raw = read_csv(path)
    expected = ["config_id", "seed"] + list(space.names)
    if header != expected:
        missing = [c for c in expected if c not in header]
        raise SchemaError(f"design {path}: bad header, missing columns {missing}")
    if not raw:
        raise EmptyDesignError(f"design {path} has no rows")

    rows = []
    points: dict[int, np.ndarray] = {}
    for cells in raw:
        if len(cells) != len(expected):
            raise SchemaError(f"design {path}: row width {len(cells)} != {len(expected)}")
        config_id = int(cells[0])
        seed = int(cells[1])
        vec = np.array([float(c) for c in cells[2:]], dtype=float)
        if not space.contains(vec):
            raise SchemaError(f"design {path}: config {config_id} lies outside the space")
        if config_id in points and not np.array_equal(points[config_id], vec):
            raise SchemaError(f"design {path}: config {config_id} has inconsistent parameters")
        points[config_id] = vec
        rows.append((config_id, vec, seed))

    ids = sorted(points)
    if ids != list(range(len(ids))):
        raise SchemaError(f"design {path}: config_ids are not contiguous from 0")
    matrix = np.vstack([points[i] for i in ids])
    design = Design(points=matrix, design_seed=int(meta["design_seed"]), space=space)
    return design, rows
