"""Parallel batch execution of replicated designs and the dataset container."""

from __future__ import annotations

import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ecosweep.errors import DataError, EmptyDesignError, SchemaError
from ecosweep.provenance import (
    fmt_float,
    provenance_dict,
    read_csv,
    read_json,
    write_csv,
    write_json,
)
from ecosweep.sim import LABELS, Outcome, SimConfig, label_to_score, run_simulation, score_to_label
from ecosweep.space import ParameterSpace, default_space

DATASET_COLUMNS = ("label", "score", "final_prey", "final_pred", "end_tick")


@dataclass(frozen=True)
class RunRecord:
    config_id: int
    seed: int
    params: np.ndarray
    outcome: Outcome
    wall_time: float = 0.0


@dataclass
class Dataset:
    """All run outcomes of one replicated design, in canonical (config, seed) order."""

    config_ids: np.ndarray     # (n,) int
    seeds: np.ndarray          # (n,) int
    params: np.ndarray         # (n, ndim) float
    scores: np.ndarray         # (n,) float in {0, 0.5, 1}
    final_prey: np.ndarray     # (n,) int
    final_pred: np.ndarray     # (n,) int
    end_ticks: np.ndarray      # (n,) int
    space: ParameterSpace
    provenance: dict = field(default_factory=dict)
    wall_times: np.ndarray | None = None

    def __post_init__(self):
        self.validate()

    def __len__(self) -> int:
        return len(self.config_ids)

    @property
    def labels(self) -> list[str]:
        return [score_to_label(s) for s in self.scores]

    @property
    def n_configs(self) -> int:
        return len(np.unique(self.config_ids))

    def replicate_counts(self) -> np.ndarray:
        return np.bincount(self.config_ids)

    def validate(self) -> None:
        n = len(self.config_ids)
        if n == 0:
            raise EmptyDesignError("dataset has no records")
        if self.params.shape != (n, self.space.ndim):
            raise SchemaError("params matrix does not match the space dimensionality")
        bad = set(np.unique(self.scores)) - {0.0, 0.5, 1.0}
        if bad:
            raise SchemaError(f"scores outside {{0, 0.5, 1}}: {sorted(bad)}")
        lower, upper = self.space.bounds()
        if np.any(self.params < lower - 1e-9) or np.any(self.params > upper + 1e-9):
            raise SchemaError("some records have parameters outside the space")
        pairs = set(zip(self.config_ids.tolist(), self.seeds.tolist()))
        if len(pairs) != n:
            raise SchemaError("(config_id, seed) pairs are not unique")
        counts = self.replicate_counts()
        counts = counts[counts > 0]
        if len(set(counts.tolist())) > 1:
            raise SchemaError("unbalanced replicates across configs")

    def records(self) -> list[RunRecord]:
        out = []
        for i in range(len(self)):
            outcome = Outcome(
                score_to_label(self.scores[i]), float(self.scores[i]),
                int(self.final_prey[i]), int(self.final_pred[i]), int(self.end_ticks[i]),
            )
            wall = float(self.wall_times[i]) if self.wall_times is not None else 0.0
            out.append(RunRecord(int(self.config_ids[i]), int(self.seeds[i]),
                                 self.params[i], outcome, wall))
        return out

    def config_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """(unique config ids, one parameter row per config)."""
        ids = np.unique(self.config_ids)
        rows = np.empty((len(ids), self.space.ndim))
        for k, cid in enumerate(ids):
            rows[k] = self.params[np.flatnonzero(self.config_ids == cid)[0]]
        return ids, rows


def _run_one(task):
    config_id, params, seed, grid_side, max_ticks, constants = task
    cfg = SimConfig(params=params, seed=seed, grid_side=grid_side,
                    max_ticks=max_ticks, constants=constants)
    t0 = time.perf_counter()
    outcome = run_simulation(cfg)
    wall = time.perf_counter() - t0
    return config_id, seed, outcome, wall


def run_batch(rows, cfg_template: SimConfig, workers: int = 1,
              space: ParameterSpace | None = None, progress: bool = False) -> Dataset:
    """Run every (config_id, params, seed) row; output order is canonical.

    Outcome columns are identical for any worker count; only wall times vary.
    """
    rows = list(rows)
    if not rows:
        raise EmptyDesignError("cannot run an empty design")
    if workers < 1:
        raise DataError("workers must be >= 1")

    tasks = [
        (config_id, np.asarray(params, dtype=float), int(seed),
         cfg_template.grid_side, cfg_template.max_ticks, cfg_template.constants)
        for config_id, params, seed in rows
    ]

    results = {}
    t_start = time.perf_counter()
    if workers == 1:
        for k, task in enumerate(tasks):
            config_id, seed, outcome, wall = _run_one(task)
            results[(config_id, seed)] = (task[1], outcome, wall)
            if progress and (k + 1) % 50 == 0:
                print(f"  {k + 1}/{len(tasks)} runs done", file=sys.stderr)
    else:
        # Warm the JIT cache in the parent so forked workers inherit it.
        _run_one((0, tasks[0][1], tasks[0][2], tasks[0][3], 1, tasks[0][5]))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(tasks) // (workers * 8))
            for task, out in zip(tasks, pool.map(_run_one, tasks, chunksize=chunk)):
                config_id, seed, outcome, wall = out
                results[(config_id, seed)] = (task[1], outcome, wall)
                if progress and len(results) % 50 == 0:
                    print(f"  {len(results)}/{len(tasks)} runs done", file=sys.stderr)

    order = sorted(results)
    n = len(order)
    ndim = len(tasks[0][1])
    ds = Dataset(
        config_ids=np.array([k[0] for k in order], dtype=int),
        seeds=np.array([k[1] for k in order], dtype=int),
        params=np.vstack([results[k][0] for k in order]).reshape(n, ndim),
        scores=np.array([results[k][1].score for k in order]),
        final_prey=np.array([results[k][1].final_prey for k in order], dtype=int),
        final_pred=np.array([results[k][1].final_pred for k in order], dtype=int),
        end_ticks=np.array([results[k][1].end_tick for k in order], dtype=int),
        space=space if space is not None else default_space(),
        wall_times=np.array([results[k][2] for k in order]),
    )
    total = time.perf_counter() - t_start
    if progress:
        print(f"  batch complete: {n} runs, total {total:.1f}s, "
              f"mean {total / n * 1000:.1f}ms/run", file=sys.stderr)
    return ds


def save_dataset(ds: Dataset, path) -> None:
    """Write dataset CSV plus a metadata sidecar with space and timing summary."""
    path = Path(path)
    header = (["config_id", "seed"] + list(ds.space.names) + list(DATASET_COLUMNS))
    prov = dict(ds.provenance) or provenance_dict(None)
    rows = []
    for i in range(len(ds)):
        label = score_to_label(ds.scores[i])
        rows.append(
            [str(int(ds.config_ids[i])), str(int(ds.seeds[i]))]
            + [fmt_float(v) for v in ds.params[i]]
            + [label, fmt_float(ds.scores[i]), str(int(ds.final_prey[i])),
               str(int(ds.final_pred[i])), str(int(ds.end_ticks[i]))]
        )
    try:
        write_csv(path, header, rows, prov)
        meta = {
            "space": ds.space.to_dict(),
            "n_records": len(ds),
            "n_configs": int(ds.n_configs),
            "provenance": prov,
        }
        if ds.wall_times is not None:
            meta["wall_time_total_s"] = float(np.sum(ds.wall_times))
            meta["wall_time_mean_s"] = float(np.mean(ds.wall_times))
        write_json(_meta_path(path), meta)
    except OSError:
        for leftover in (path, _meta_path(path)):
            leftover.unlink(missing_ok=True)
        raise


def _meta_path(path) -> Path:
    return Path(str(path) + ".meta.json")


def load_dataset(path) -> Dataset:
    """Read and schema-validate a dataset CSV (+ sidecar)."""
    path = Path(path)
    meta_file = _meta_path(path)
    if not meta_file.exists():
        raise SchemaError(f"dataset sidecar {meta_file} is missing")
    meta = read_json(meta_file)
    space = ParameterSpace.from_dict(meta["space"])
    prov, header, raw = read_csv(path)
    expected = ["config_id", "seed"] + list(space.names) + list(DATASET_COLUMNS)
    missing = [c for c in expected if c not in header]
    if missing:
        raise SchemaError(f"dataset {path}: missing columns {missing}")
    if header != expected:
        raise SchemaError(f"dataset {path}: unexpected column order {header}")
    if not raw:
        raise EmptyDesignError(f"dataset {path} has no rows")

    ndim = space.ndim
    n = len(raw)
    config_ids = np.empty(n, dtype=int)
    seeds = np.empty(n, dtype=int)
    params = np.empty((n, ndim))
    scores = np.empty(n)
    prey = np.empty(n, dtype=int)
    pred = np.empty(n, dtype=int)
    ticks = np.empty(n, dtype=int)
    for i, cells in enumerate(raw):
        if len(cells) != len(expected):
            raise SchemaError(f"dataset {path}: row width {len(cells)} != {len(expected)}")
        config_ids[i] = int(cells[0])
        seeds[i] = int(cells[1])
        params[i] = [float(c) for c in cells[2:2 + ndim]]
        label = cells[2 + ndim]
        score = float(cells[3 + ndim])
        if label not in LABELS:
            raise SchemaError(f"dataset {path}: unknown label {label!r}")
        if label_to_score(label) != score:
            raise SchemaError(f"dataset {path}: label {label!r} and score {score} disagree")
        scores[i] = score
        prey[i] = int(cells[4 + ndim])
        pred[i] = int(cells[5 + ndim])
        ticks[i] = int(cells[6 + ndim])
    return Dataset(
        config_ids=config_ids, seeds=seeds, params=params, scores=scores,
        final_prey=prey, final_pred=pred, end_ticks=ticks, space=space,
        provenance=prov,
    )
