"""Provenance headers and deterministic serialization helpers.

Every emitted artifact carries the tool version, a hash of the producing
configuration and the seeds involved.  Timestamps are deliberately omitted so
that reruns with identical configuration produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from ecosweep import __version__


def config_hash(payload) -> str:
    """Stable short hash of an arbitrary JSON-serializable configuration."""
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def provenance_dict(config_payload=None, seeds=None) -> dict:
    prov = {"generator": f"ecosweep {__version__}"}
    if config_payload is not None:
        prov["config_hash"] = config_hash(config_payload)
    if seeds is not None:
        prov["seeds"] = list(seeds)
    return prov


def provenance_lines(prov: dict) -> list[str]:
    """Render a provenance dict as '#'-prefixed CSV comment lines."""
    out = []
    for key, value in prov.items():
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        out.append(f"# {key}={value}")
    return out


def fmt_float(x: float) -> str:
    """Shortest representation that round-trips exactly through float()."""
    return repr(float(x))


def write_csv(path, header: list[str], rows, prov: dict) -> None:
    """Write a provenance-commented CSV; cells are already strings."""
    path = Path(path)
    lines = provenance_lines(prov)
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def read_csv(path) -> tuple[dict, list[str], list[list[str]]]:
    """Read a provenance-commented CSV into (provenance, header, rows)."""
    prov: dict = {}
    header: list[str] | None = None
    rows: list[list[str]] = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                prov[key.strip()] = value.strip()
            continue
        if header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    if header is None:
        from ecosweep.errors import SchemaError

        raise SchemaError(f"{path}: no CSV header found")
    return prov, header, rows


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())
