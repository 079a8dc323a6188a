"""Deterministic-given-seed spatial predator-prey simulation."""

from ecosweep.sim.config import (
    LABELS,
    Outcome,
    Patch,
    SimConfig,
    SpeciesConstants,
    grow_grass,
    hazard_death_prob,
    label_to_score,
    score_to_label,
)
from ecosweep.sim.world import (
    World,
    init_world,
    run_simulation,
    simulate_trajectory,
    step,
    toroidal_distance,
    world_hash,
)

__all__ = [
    "LABELS",
    "Outcome",
    "Patch",
    "SimConfig",
    "SpeciesConstants",
    "World",
    "grow_grass",
    "hazard_death_prob",
    "init_world",
    "label_to_score",
    "run_simulation",
    "score_to_label",
    "simulate_trajectory",
    "step",
    "toroidal_distance",
    "world_hash",
]
