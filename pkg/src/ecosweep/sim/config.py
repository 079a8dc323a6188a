"""Simulation configuration, constants and outcome types."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ecosweep.errors import DataError
from ecosweep.space import DIM_NAMES

# Lever indices in canonical order (matches DIM_NAMES).
GR, PH, PM, PR, BF, BG, BR, BH, BV, FG, FR, FH, FV = range(13)

MAX_VIEW_RADIUS = 3.0

LABELS = ("extinction", "prey_survival", "coexistence")
_SCORE_OF = {"extinction": 0.0, "prey_survival": 0.5, "coexistence": 1.0}
_LABEL_OF = {0.0: "extinction", 0.5: "prey_survival", 1.0: "coexistence"}


def label_to_score(label: str) -> float:
    try:
        return _SCORE_OF[label]
    except KeyError:
        raise DataError(f"unknown outcome label {label!r}") from None


def score_to_label(score: float) -> str:
    try:
        return _LABEL_OF[float(score)]
    except KeyError:
        raise DataError(f"score {score!r} is not in {{0, 0.5, 1}}") from None


@dataclass(frozen=True)
class SpeciesConstants:
    """Model constants that are not part of the 13 experimental levers.

    Values are defaults chosen for this implementation and recorded in run
    metadata; all are overridable through configuration.  ``max_prey`` and
    ``max_foxes`` are per-species crowding caps (reproduction pauses while a
    species is above its cap); they bound runaway blooms in generous corners
    of the space; 0 disables a cap.
    """

    init_bandicoots: int = 100
    init_foxes: int = 30
    max_age_bandicoot: int = 200
    max_age_fox: int = 300
    repro_age_bandicoot: int = 5
    repro_age_fox: int = 40
    repro_prob: float = 0.5
    max_offspring: int = 5
    stride: int = 1
    cluster_centers: int = 5
    decay_k: float = 0.15
    hazard_scale: float = 1.0
    max_prey: int = 1200
    max_foxes: int = 250

    def __post_init__(self):
        counts = (
            self.init_bandicoots, self.init_foxes, self.max_age_bandicoot,
            self.max_age_fox, self.repro_age_bandicoot, self.repro_age_fox,
            self.max_offspring, self.max_prey, self.max_foxes,
        )
        if any(c < 0 for c in counts):
            raise DataError("species constants: counts must be >= 0")
        if not 0.0 <= self.repro_prob <= 1.0:
            raise DataError("repro_prob must lie in [0, 1]")
        if self.decay_k <= 0:
            raise DataError("decay_k must be > 0")
        if self.cluster_centers < 1:
            raise DataError("cluster_centers must be >= 1")
        if self.stride < 1:
            raise DataError("stride must be >= 1")
        if self.hazard_scale < 0:
            raise DataError("hazard_scale must be >= 0")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, payload: dict) -> "SpeciesConstants":
        known = set(cls.__dataclass_fields__)
        unknown = set(payload) - known
        if unknown:
            raise DataError(f"unknown species constants: {sorted(unknown)}")
        return cls(**payload)


DEFAULT_GRID_SIDE = 60
DEFAULT_MAX_TICKS = 1000


@dataclass(frozen=True)
class SimConfig:
    """One simulation run: the 13 levers, a seed and the fixed constants."""

    params: np.ndarray
    seed: int
    grid_side: int = DEFAULT_GRID_SIDE
    max_ticks: int = DEFAULT_MAX_TICKS
    constants: SpeciesConstants = field(default_factory=SpeciesConstants)

    def __post_init__(self):
        p = np.asarray(self.params, dtype=float)
        object.__setattr__(self, "params", p)
        if p.shape != (len(DIM_NAMES),):
            raise DataError(f"params must have {len(DIM_NAMES)} values, got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise DataError("params must be finite")
        if np.any(p < 0):
            raise DataError("params must be >= 0")
        if p[GR] > 100.0:
            raise DataError(f"Gr={p[GR]} demands more fertile patches than cells")
        for idx, name in ((PH, "PH"), (BH, "BH"), (FH, "FH")):
            if p[idx] > 100.0:
                raise DataError(f"{name}={p[idx]} is a percentage and must be <= 100")
        for idx, name in ((BV, "BV"), (FV, "FV")):
            if p[idx] > MAX_VIEW_RADIUS:
                raise DataError(f"{name}={p[idx]} exceeds the supported view radius {MAX_VIEW_RADIUS}")
        if self.grid_side <= 0:
            raise DataError("grid_side must be > 0")
        if self.max_ticks <= 0:
            raise DataError("max_ticks must be > 0")

    def with_params(self, params, seed) -> "SimConfig":
        return replace(self, params=np.asarray(params, dtype=float), seed=int(seed))


@dataclass(frozen=True)
class Patch:
    """A single grid cell: grass energy plus fertility and hunting flags."""

    grass: float
    fertile: bool
    hunting_zone: bool = False

    def __post_init__(self):
        if self.hunting_zone and not self.fertile:
            raise DataError("hunting zones exist only on fertile patches")
        if self.grass < 0:
            raise DataError("grass energy cannot be negative")


def grow_grass(patch: Patch, g: float, r_max: float) -> Patch:
    """Regrow one patch: fertile grass increases by g, clamped to r_max."""
    if not patch.fertile:
        return patch
    return Patch(min(r_max, patch.grass + g), patch.fertile, patch.hunting_zone)


def hazard_death_prob(quota: float, hazard_scale: float) -> float:
    """Per-tick death probability on a hunting-zone patch for quota in [0, 100]."""
    return hazard_scale * quota / 100.0


@dataclass(frozen=True)
class Outcome:
    """Terminal regime of a run with its ordinal encoding."""

    label: str
    score: float
    final_prey: int
    final_pred: int
    end_tick: int

    def __post_init__(self):
        if _SCORE_OF.get(self.label) != self.score:
            raise DataError(f"label {self.label!r} and score {self.score} disagree")


def classify_outcome(final_prey: int, final_pred: int, end_tick: int) -> Outcome:
    if final_prey == 0:
        label = "extinction"
    elif final_pred == 0:
        label = "prey_survival"
    else:
        label = "coexistence"
    return Outcome(label, _SCORE_OF[label], int(final_prey), int(final_pred), int(end_tick))
