"""Readers for the pipeline's documented CSV/JSON artifact formats."""

from __future__ import annotations

import json
from pathlib import Path


class SchemaMismatch(ValueError):
    """An input file does not conform to its documented schema."""


def read_commented_csv(path) -> tuple[list[str], list[list[str]]]:
    """CSV with '#'-prefixed provenance comments before the header."""
    header = None
    rows = []
    for line in Path(path).read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        if header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    if header is None:
        raise SchemaMismatch(f"{path}: no CSV header found")
    return header, rows


def require_columns(path, header: list[str], needed: list[str]) -> dict[str, int]:
    index = {}
    for column in needed:
        if column not in header:
            raise SchemaMismatch(f"{path}: missing column '{column}'")
        index[column] = header.index(column)
    return index


def load_dataset_labels(path) -> list[str]:
    """Outcome labels from a run dataset CSV."""
    header, rows = read_commented_csv(path)
    cols = require_columns(path, header, ["config_id", "seed", "label"])
    labels = [r[cols["label"]] for r in rows]
    known = {"extinction", "prey_survival", "coexistence"}
    bad = sorted(set(labels) - known)
    if bad:
        raise SchemaMismatch(f"{path}: unknown labels in column 'label': {bad}")
    return labels


def load_sobol(path) -> dict:
    """Sobol index JSON: names plus s1/st maps and optional s2 entries."""
    payload = json.loads(Path(path).read_text())
    for key in ("names", "s1", "st"):
        if key not in payload:
            raise SchemaMismatch(f"{path}: missing key '{key}'")
    names = payload["names"]
    for key in ("s1", "st"):
        missing = [n for n in names if n not in payload[key]]
        if missing:
            raise SchemaMismatch(f"{path}: key '{key}' lacks dims {missing}")
    return payload


def load_curves(path) -> dict:
    """Long-format pdp/ice CSV -> {dim, grid, pdp, ice: {id: values}, colors}."""
    header, rows = read_commented_csv(path)
    cols = require_columns(
        path, header, ["dim", "curve_id", "grid_index", "grid_value", "value"])
    color_col = header.index("color_value") if "color_value" in header else None

    dim = None
    pdp: dict[int, float] = {}
    grid: dict[int, float] = {}
    ice: dict[str, dict[int, float]] = {}
    colors: dict[str, float] = {}
    for r in rows:
        dim = r[cols["dim"]]
        curve = r[cols["curve_id"]]
        gi = int(r[cols["grid_index"]])
        grid[gi] = float(r[cols["grid_value"]])
        value = float(r[cols["value"]])
        if curve == "pdp":
            pdp[gi] = value
        else:
            ice.setdefault(curve, {})[gi] = value
            if color_col is not None and r[color_col] != "":
                colors[curve] = float(r[color_col])
    if not pdp:
        raise SchemaMismatch(f"{path}: no 'pdp' rows in column 'curve_id'")
    order = sorted(grid)
    return {
        "dim": dim,
        "grid": [grid[i] for i in order],
        "pdp": [pdp[i] for i in order],
        "ice": {k: [v[i] for i in order] for k, v in ice.items()},
        "colors": colors,
    }


def load_uncertainty(path) -> dict:
    """Uncertainty field CSV -> {dim, grid, sigma_a, sigma_e, sigma_t}."""
    header, rows = read_commented_csv(path)
    cols = require_columns(
        path, header,
        ["dim", "grid_value", "sigma_aleatoric", "sigma_epistemic", "sigma_total"])
    out = {"dim": None, "grid": [], "sigma_a": [], "sigma_e": [], "sigma_t": []}
    for r in rows:
        out["dim"] = r[cols["dim"]]
        out["grid"].append(float(r[cols["grid_value"]]))
        out["sigma_a"].append(float(r[cols["sigma_aleatoric"]]))
        out["sigma_e"].append(float(r[cols["sigma_epistemic"]]))
        out["sigma_t"].append(float(r[cols["sigma_total"]]))
    if not out["grid"]:
        raise SchemaMismatch(f"{path}: no data rows")
    return out
