"""Experimental parameter space: the 13 continuous levers plus seed levels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ecosweep.errors import InvalidClipError, InvalidSpaceError

# Canonical lever order; also the column order of every design/dataset CSV.
DIM_NAMES = (
    "Gr", "PH", "PM", "PR", "BF", "BG", "BR", "BH", "BV", "FG", "FR", "FH", "FV",
)

_DEFAULT_DIMS = (
    ("Gr", 10.0, 100.0, "%"),       # grassland proportion of the map
    ("PH", 0.0, 100.0, "%"),        # hunting-zone proportion of grassland
    ("PM", 50.0, 250.0, "E"),       # maximum plant energy per patch
    ("PR", 5.0, 25.0, "E/t"),       # plant growth rate
    ("BF", 2.0, 10.0, "E"),         # grass intake per feeding bandicoot
    ("BG", 1.0, 20.0, "E"),         # bandicoot energy gain when eating
    ("BR", 8.0, 20.0, "E"),         # bandicoot reproduction energy reserve
    ("BH", 0.0, 100.0, "%"),        # bandicoot hunting quota
    ("BV", 0.0, 3.0, "cells"),      # bandicoot view radius
    ("FG", 10.0, 50.0, "E"),        # fox energy gain when eating
    ("FR", 12.0, 30.0, "E"),        # fox reproduction energy reserve
    ("FH", 0.0, 100.0, "%"),        # fox hunting quota
    ("FV", 0.0, 3.0, "cells"),      # fox view radius
)

DEFAULT_SEED_LEVELS = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class Dim:
    name: str
    lower: float
    upper: float
    units: str = ""


@dataclass(frozen=True)
class ParameterSpace:
    """Ordered continuous dimensions plus the categorical replication seeds."""

    dims: tuple[Dim, ...]
    seed_levels: tuple[int, ...] = DEFAULT_SEED_LEVELS

    def __post_init__(self):
        names = [d.name for d in self.dims]
        if not names:
            raise InvalidSpaceError("space has no dimensions")
        if len(set(names)) != len(names):
            raise InvalidSpaceError("dimension names are not unique")
        unknown = [n for n in names if n not in DIM_NAMES]
        if unknown:
            raise InvalidSpaceError(f"unknown dimension codes: {unknown}")
        for d in self.dims:
            if not d.lower < d.upper:
                raise InvalidSpaceError(
                    f"dimension {d.name}: lower {d.lower} must be < upper {d.upper}"
                )
        if len(self.seed_levels) == 0:
            raise InvalidSpaceError("seed_levels must be non-empty")
        if len(set(self.seed_levels)) != len(self.seed_levels):
            raise InvalidSpaceError("seed_levels must be distinct")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dims)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lower = np.array([d.lower for d in self.dims], dtype=float)
        upper = np.array([d.upper for d in self.dims], dtype=float)
        return lower, upper

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InvalidSpaceError(f"dimension {name!r} not in space") from None

    def contains(self, x: np.ndarray, atol: float = 1e-9) -> bool:
        lower, upper = self.bounds()
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= lower - atol) and np.all(x <= upper + atol))

    def to_dict(self) -> dict:
        return {
            "dims": [
                {"name": d.name, "lower": d.lower, "upper": d.upper, "units": d.units}
                for d in self.dims
            ],
            "seed_levels": list(self.seed_levels),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ParameterSpace":
        try:
            dims = tuple(
                Dim(d["name"], float(d["lower"]), float(d["upper"]), d.get("units", ""))
                for d in payload["dims"]
            )
            seeds = tuple(int(s) for s in payload["seed_levels"])
        except (KeyError, TypeError) as exc:
            raise InvalidSpaceError(f"malformed space payload: {exc}") from exc
        return cls(dims=dims, seed_levels=seeds)


def default_space(seed_levels=DEFAULT_SEED_LEVELS) -> ParameterSpace:
    """The full experimental space over all 13 levers."""
    dims = tuple(Dim(*row) for row in _DEFAULT_DIMS)
    return ParameterSpace(dims=dims, seed_levels=tuple(seed_levels))


def refine_space(space: ParameterSpace, clips: list[tuple[str, float, float]]) -> ParameterSpace:
    """Return a copy of *space* with the given dims clipped to sub-intervals.

    Each clip is (name, new_lower, new_upper) and must lie inside the
    original range; anything else raises :class:`InvalidClipError`.
    """
    by_name = {d.name: d for d in space.dims}
    for name, lo, hi in clips:
        if name not in by_name:
            raise InvalidClipError(f"cannot clip unknown dimension {name!r}")
        orig = by_name[name]
        if not (orig.lower <= lo < hi <= orig.upper):
            raise InvalidClipError(
                f"clip {name} to [{lo}, {hi}] is not a sub-interval of "
                f"[{orig.lower}, {orig.upper}]"
            )
        by_name[name] = Dim(name, float(lo), float(hi), orig.units)
    return ParameterSpace(
        dims=tuple(by_name[d.name] for d in space.dims),
        seed_levels=space.seed_levels,
    )
