"""Tipping-point detection along a one-dimensional response slice."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ecosweep.errors import DataError

_EPS = 1e-12


@dataclass(frozen=True)
class TippingPoint:
    dim: str
    value: float
    kind: str        # uncertainty-peak | uncertainty-drop | pdp-inflection
    magnitude: float

    def to_dict(self) -> dict:
        return {"dim": self.dim, "value": self.value, "kind": self.kind,
                "magnitude": self.magnitude}


def detect_tipping_points(dim: str, grid: np.ndarray, pdp: np.ndarray,
                          sigma_total: np.ndarray) -> list[TippingPoint]:
    """Flag structure along the slice, sorted by descending magnitude.

    Uncertainty peaks are strict interior local maxima of sigma_total (scored
    by local prominence), the uncertainty drop is the steepest strictly
    negative descent, and the PDP inflection is the largest absolute second
    difference.
    """
    grid = np.asarray(grid, dtype=float)
    pdp = np.asarray(pdp, dtype=float)
    sigma_total = np.asarray(sigma_total, dtype=float)
    if not (len(grid) == len(pdp) == len(sigma_total)):
        raise DataError("grids of the curve and the uncertainty field are not aligned")
    points: list[TippingPoint] = []
    n = len(grid)

    for i in range(1, n - 1):
        if sigma_total[i] > sigma_total[i - 1] + _EPS and sigma_total[i] > sigma_total[i + 1] + _EPS:
            prominence = sigma_total[i] - (sigma_total[i - 1] + sigma_total[i + 1]) / 2.0
            points.append(TippingPoint(dim, float(grid[i]), "uncertainty-peak",
                                       float(prominence)))

    if n >= 2:
        diffs = np.diff(sigma_total)
        k = int(np.argmin(diffs))
        if diffs[k] < -_EPS:
            points.append(TippingPoint(dim, float((grid[k] + grid[k + 1]) / 2.0),
                                       "uncertainty-drop", float(-diffs[k])))

    if n >= 3:
        second = pdp[2:] - 2.0 * pdp[1:-1] + pdp[:-2]
        k = int(np.argmax(np.abs(second)))
        if abs(second[k]) > _EPS:
            points.append(TippingPoint(dim, float(grid[k + 1]), "pdp-inflection",
                                       float(abs(second[k]))))

    points.sort(key=lambda p: -p.magnitude)
    return points
