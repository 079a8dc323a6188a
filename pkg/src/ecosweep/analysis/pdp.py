"""Partial dependence and individual conditional expectation curves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ecosweep.errors import DataError
from ecosweep.runner import Dataset


@dataclass(frozen=True)
class CurveSet:
    dim: str
    grid: np.ndarray                 # (G,)
    pdp: np.ndarray                  # (G,) columnwise mean of ice
    ice: np.ndarray                  # (n_instances, G)
    instance_ids: np.ndarray         # config ids backing each ICE strand
    color_key: np.ndarray | None     # per-instance value of a second dim

    def to_rows(self):
        """Long-format rows: (curve_id, grid_index, grid_value, value, color)."""
        rows = []
        for g in range(len(self.grid)):
            rows.append(("pdp", g, float(self.grid[g]), float(self.pdp[g]), None))
        for k in range(self.ice.shape[0]):
            color = None if self.color_key is None else float(self.color_key[k])
            for g in range(len(self.grid)):
                rows.append((str(int(self.instance_ids[k])), g, float(self.grid[g]),
                             float(self.ice[k, g]), color))
        return rows


def pdp_ice(f, ds: Dataset, dim: str, grid_size: int = 40,
            ice_subsample: int = 200, color_dim: str | None = None,
            subsample_seed: int = 0) -> CurveSet:
    """ICE curves over dataset configs with the PDP as their pointwise mean.

    ``f`` maps an (n, d) matrix to values; the grid spans ``dim``'s range in
    the dataset's (possibly refined) space.
    """
    if grid_size < 2:
        raise DataError("grid_size must be >= 2")
    j = ds.space.index(dim)
    lo, hi = ds.space.dims[j].lower, ds.space.dims[j].upper
    grid = np.linspace(lo, hi, grid_size)

    ids, rows = ds.config_matrix()
    if ice_subsample and ice_subsample < len(ids):
        rng = np.random.default_rng(subsample_seed)
        keep = np.sort(rng.choice(len(ids), size=ice_subsample, replace=False))
        ids = ids[keep]
        rows = rows[keep]

    ice = np.empty((len(ids), grid_size))
    work = rows.copy()
    for g, value in enumerate(grid):
        work[:, j] = value
        ice[:, g] = f(work)
        work[:, j] = rows[:, j]

    color = None
    if color_dim is not None:
        color = rows[:, ds.space.index(color_dim)].copy()
    return CurveSet(
        dim=dim, grid=grid, pdp=ice.mean(axis=0), ice=ice,
        instance_ids=ids, color_key=color,
    )
