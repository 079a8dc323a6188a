"""World state and the simulation driver built on the compiled kernels."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from ecosweep.errors import DataError
from ecosweep.sim import kernels
from ecosweep.sim.config import Outcome, SimConfig, classify_outcome


def constants_vector(cfg: SimConfig) -> np.ndarray:
    c = cfg.constants
    cc = np.zeros(14, dtype=np.float64)
    cc[kernels.C_AMAX_B] = c.max_age_bandicoot
    cc[kernels.C_AMAX_F] = c.max_age_fox
    cc[kernels.C_AREP_B] = c.repro_age_bandicoot
    cc[kernels.C_AREP_F] = c.repro_age_fox
    cc[kernels.C_REPRO_PROB] = c.repro_prob
    cc[kernels.C_MAX_OFF] = c.max_offspring
    cc[kernels.C_STRIDE] = c.stride
    cc[kernels.C_HAZARD] = c.hazard_scale
    cc[kernels.C_MAX_PREY] = c.max_prey
    cc[kernels.C_MAX_FOX] = c.max_foxes
    cc[kernels.C_INIT_B] = c.init_bandicoots
    cc[kernels.C_INIT_F] = c.init_foxes
    cc[kernels.C_CENTERS] = c.cluster_centers
    cc[kernels.C_DECAY_K] = c.decay_k
    return cc


@dataclass
class World:
    """Mutable simulation state; arrays are oversized, the first n_agents rows are live."""

    side: int
    grass: np.ndarray
    fertile: np.ndarray
    hunting: np.ndarray
    species: np.ndarray
    pos: np.ndarray
    energy: np.ndarray
    age: np.ndarray
    alive: np.ndarray
    rng_state: np.ndarray
    n_agents: int
    tick: int = 0
    n_prey: int = 0
    n_pred: int = 0
    total_grass: float = 0.0

    # per-cell prey index, rebuilt by each tick
    head: np.ndarray = None
    nxt: np.ndarray = None
    prv: np.ndarray = None
    cnt: np.ndarray = None


def toroidal_distance(a: tuple[int, int], b: tuple[int, int], side: int) -> float:
    """Euclidean distance on the torus between two (row, col) cells."""
    dr = abs(a[0] - b[0])
    dr = min(dr, side - dr)
    dc = abs(a[1] - b[1])
    dc = min(dc, side - dc)
    return math.hypot(dr, dc)


def _alloc_agents(world: World, capacity: int) -> None:
    n = world.n_agents
    for name, dtype in (("species", np.int8), ("pos", np.int64),
                        ("energy", np.float64), ("age", np.int64),
                        ("alive", np.bool_)):
        old = getattr(world, name)
        new = np.zeros(capacity, dtype=dtype)
        if old is not None and n > 0:
            new[:n] = old[:n]
        setattr(world, name, new)
    world.nxt = np.full(capacity, -1, dtype=np.int64)
    world.prv = np.full(capacity, -1, dtype=np.int64)


def init_world(cfg: SimConfig) -> World:
    """Create the seeded initial world: clustered fertility, hunting zones, agents."""
    side = cfg.grid_side
    ncells = side * side
    c = cfg.constants
    n0 = c.init_bandicoots + c.init_foxes
    capacity = max(256, (n0 + 16) * (2 + c.max_offspring))
    world = World(
        side=side,
        grass=np.zeros(ncells, dtype=np.float64),
        fertile=np.zeros(ncells, dtype=np.bool_),
        hunting=np.zeros(ncells, dtype=np.bool_),
        species=None, pos=None, energy=None, age=None, alive=None,
        rng_state=kernels.seed_state(cfg.seed),
        n_agents=0,
        head=np.full(ncells, -1, dtype=np.int64),
        cnt=np.zeros(ncells, dtype=np.int64),
    )
    _alloc_agents(world, capacity)
    n = kernels.init_kernel(
        world.grass, world.fertile, world.hunting,
        world.species, world.pos, world.energy, world.age, world.alive,
        world.rng_state, cfg.params, side, constants_vector(cfg),
    )
    world.n_agents = int(n)
    world.n_prey = int(np.sum(world.species[:n] == 0))
    world.n_pred = int(n - world.n_prey)
    world.total_grass = float(np.sum(world.grass))
    return world


def _ensure_capacity(world: World, cfg: SimConfig) -> None:
    need = world.n_agents * (1 + cfg.constants.max_offspring) + 64
    cap = world.species.shape[0]
    if cap < need:
        _alloc_agents(world, max(need, 2 * cap))


def step(world: World, cfg: SimConfig) -> World:
    """Advance the world by one tick (in place; returns the same object)."""
    if world.tick >= cfg.max_ticks:
        raise DataError(f"cannot step past max_ticks={cfg.max_ticks}")
    _ensure_capacity(world, cfg)
    n, n_prey, n_pred, total_grass = kernels.tick_kernel(
        world.grass, world.fertile, world.hunting,
        world.species, world.pos, world.energy, world.age, world.alive,
        world.n_agents, world.rng_state, cfg.params, world.side,
        constants_vector(cfg), world.head, world.nxt, world.prv, world.cnt,
    )
    world.n_agents = int(n)
    world.n_prey = int(n_prey)
    world.n_pred = int(n_pred)
    world.total_grass = float(total_grass)
    world.tick += 1
    return world


def world_hash(world: World) -> str:
    """Digest of the full observable world state (agents in storage order)."""
    h = hashlib.sha256()
    n = world.n_agents
    h.update(np.int64(world.tick).tobytes())
    h.update(np.int64(n).tobytes())
    h.update(world.grass.tobytes())
    h.update(world.fertile.tobytes())
    h.update(world.hunting.tobytes())
    h.update(world.species[:n].tobytes())
    h.update(world.pos[:n].tobytes())
    h.update(world.energy[:n].tobytes())
    h.update(world.age[:n].tobytes())
    h.update(world.rng_state.tobytes())
    return h.hexdigest()


def run_simulation(cfg: SimConfig) -> Outcome:
    """Run to max_ticks or until no agents remain; classify the final state."""
    world = init_world(cfg)
    while world.tick < cfg.max_ticks and world.n_agents > 0:
        step(world, cfg)
    return classify_outcome(world.n_prey, world.n_pred, world.tick)


def simulate_trajectory(cfg: SimConfig) -> tuple[Outcome, np.ndarray]:
    """Like run_simulation but also returns per-tick (tick, prey, pred, grass)."""
    world = init_world(cfg)
    rows = [(0, world.n_prey, world.n_pred, world.total_grass)]
    while world.tick < cfg.max_ticks and world.n_agents > 0:
        step(world, cfg)
        rows.append((world.tick, world.n_prey, world.n_pred, world.total_grass))
    outcome = classify_outcome(world.n_prey, world.n_pred, world.tick)
    return outcome, np.array(rows, dtype=np.float64)
