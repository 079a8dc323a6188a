"""Figure rendering for the five supported artifact kinds."""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from plotkit.schemas import (
    SchemaMismatch,
    load_curves,
    load_dataset_labels,
    load_sobol,
    load_uncertainty,
)

FIGURE_KINDS = ("regimes", "sobol-bars", "sobol-heatmap", "pdp-ice", "uncertainty")

REGIME_ORDER = ("extinction", "prey_survival", "coexistence")
REGIME_COLORS = {"extinction": "#b2182b", "prey_survival": "#fdae61",
                 "coexistence": "#1a9850"}


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[str, ...]
    output: str
    title: str | None = None
    dpi: int = 150
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaMismatch(f"unknown figure kind {self.kind!r}; "
                                 f"expected one of {FIGURE_KINDS}")
        if not self.inputs:
            raise SchemaMismatch("at least one input file is required")


def render(spec: FigureSpec) -> dict:
    """Write the figure for *spec*; returns a small summary for callers."""
    fig, summary = _RENDERERS[spec.kind](spec)
    if spec.title:
        fig.suptitle(spec.title)
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=spec.dpi, bbox_inches="tight")
    plt.close(fig)
    summary["output"] = str(out)
    summary["kind"] = spec.kind
    return summary


def _render_regimes(spec: FigureSpec):
    """Outcome distribution bars, optionally comparing several datasets."""
    fig, ax = plt.subplots(figsize=(6, 4))
    n_sets = len(spec.inputs)
    width = 0.8 / n_sets
    counts_per_input = []
    for k, path in enumerate(spec.inputs):
        labels = load_dataset_labels(path)
        counts = Counter(labels)
        total = len(labels)
        shares = [counts.get(r, 0) / total for r in REGIME_ORDER]
        counts_per_input.append({r: counts.get(r, 0) for r in REGIME_ORDER})
        xs = np.arange(len(REGIME_ORDER)) + (k - (n_sets - 1) / 2) * width
        bars = ax.bar(xs, shares, width=width,
                      color=[REGIME_COLORS[r] for r in REGIME_ORDER],
                      alpha=1.0 if n_sets == 1 else 0.5 + 0.5 * k / max(1, n_sets - 1),
                      edgecolor="black", linewidth=0.5,
                      label=Path(path).stem)
        for bar, share in zip(bars, shares):
            ax.text(bar.get_x() + bar.get_width() / 2, share, f"{share:.0%}",
                    ha="center", va="bottom", fontsize=8)
    ax.set_xticks(np.arange(len(REGIME_ORDER)))
    ax.set_xticklabels([r.replace("_", " ") for r in REGIME_ORDER])
    ax.set_ylabel("share of runs")
    ax.set_ylim(0, 1.05)
    if n_sets > 1:
        ax.legend(fontsize=8)
    ax.set_title("Regime distribution")
    return fig, {"n_inputs": n_sets, "counts": counts_per_input}


def _render_sobol_bars(spec: FigureSpec):
    """Grouped S1/ST bars in descending total-order importance."""
    payload = load_sobol(spec.inputs[0])
    names = sorted(payload["names"], key=lambda n: -payload["st"][n])
    s1 = [payload["s1"][n] for n in names]
    st = [payload["st"][n] for n in names]
    xs = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(max(6, 0.6 * len(names)), 4))
    ax.bar(xs - 0.2, s1, width=0.4, label="first order (S1)", color="#4393c3")
    ax.bar(xs + 0.2, st, width=0.4, label="total order (ST)", color="#2166ac")
    ax.set_xticks(xs)
    ax.set_xticklabels(names, rotation=45, ha="right")
    ax.set_ylabel("variance share")
    ax.legend()
    ax.set_title("Sensitivity indices")
    return fig, {"order": names, "sum_s1": float(np.sum(s1))}


def _render_sobol_heatmap(spec: FigureSpec):
    """Second-order interaction heatmap over the dims present in s2."""
    payload = load_sobol(spec.inputs[0])
    entries = payload.get("s2", [])
    if not entries:
        raise SchemaMismatch(f"{spec.inputs[0]}: no 's2' entries to draw")
    dims = sorted({d for e in entries for d in e["dims"]},
                  key=lambda n: -payload["st"][n])
    index = {d: i for i, d in enumerate(dims)}
    matrix = np.full((len(dims), len(dims)), np.nan)
    for e in entries:
        a, b = e["dims"]
        matrix[index[a], index[b]] = e["value"]
        matrix[index[b], index[a]] = e["value"]
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    im = ax.imshow(matrix, cmap="viridis")
    ax.set_xticks(range(len(dims)))
    ax.set_xticklabels(dims, rotation=45, ha="right")
    ax.set_yticks(range(len(dims)))
    ax.set_yticklabels(dims)
    for i in range(len(dims)):
        for j in range(len(dims)):
            if not np.isnan(matrix[i, j]):
                ax.text(j, i, f"{matrix[i, j]:.2f}", ha="center", va="center",
                        fontsize=7, color="white")
    fig.colorbar(im, ax=ax, label="pairwise interaction share")
    ax.set_title("Second-order interactions")
    return fig, {"dims": dims, "n_pairs": len(entries)}


def _render_pdp_ice(spec: FigureSpec):
    """Thin ICE strands under a bold PDP mean curve."""
    data = load_curves(spec.inputs[0])
    fig, ax = plt.subplots(figsize=(6, 4))
    strands = list(data["ice"].items())
    if not strands:
        warnings.warn("no ICE strands in input; drawing the PDP only")
    colors = data["colors"]
    mappable = None
    if colors:
        values = np.array([colors.get(cid, np.nan) for cid, _ in strands])
        vmin, vmax = np.nanmin(values), np.nanmax(values)
        cmap = plt.get_cmap("coolwarm")
        norm = matplotlib.colors.Normalize(vmin=vmin, vmax=vmax)
        mappable = matplotlib.cm.ScalarMappable(norm=norm, cmap=cmap)
        for (cid, ys), val in zip(strands, values):
            color = cmap(norm(val)) if np.isfinite(val) else "0.7"
            ax.plot(data["grid"], ys, color=color, lw=0.6, alpha=0.6)
    else:
        for cid, ys in strands:
            ax.plot(data["grid"], ys, color="0.6", lw=0.6, alpha=0.6)
    ax.plot(data["grid"], data["pdp"], color="black", lw=2.5, label="mean (PDP)")
    ax.set_xlabel(data["dim"])
    ax.set_ylabel("P(coexistence)")
    ax.legend(fontsize=8)
    if mappable is not None:
        fig.colorbar(mappable, ax=ax, label="color key")
    ax.set_title(f"Response curves along {data['dim']}")
    return fig, {"n_ice": len(strands), "dim": data["dim"],
                 "n_grid": len(data["grid"])}


def _render_uncertainty(spec: FigureSpec):
    """Aleatoric/epistemic/total uncertainty overlay along one lever."""
    data = load_uncertainty(spec.inputs[0])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(data["grid"], data["sigma_a"], label="aleatoric", color="#d95f02",
            lw=1.5, ls="--")
    ax.plot(data["grid"], data["sigma_e"], label="epistemic", color="#7570b3",
            lw=1.5, ls=":")
    ax.plot(data["grid"], data["sigma_t"], label="total", color="#1b9e77", lw=2.5)
    ax.fill_between(data["grid"], 0, data["sigma_t"], color="#1b9e77", alpha=0.15)
    ax.set_xlabel(data["dim"])
    ax.set_ylabel("uncertainty (sigma)")
    ax.legend(fontsize=8)
    ax.set_title(f"Uncertainty decomposition along {data['dim']}")
    return fig, {"dim": data["dim"], "n_grid": len(data["grid"]),
                 "max_total": float(max(data["sigma_t"]))}


_RENDERERS = {
    "regimes": _render_regimes,
    "sobol-bars": _render_sobol_bars,
    "sobol-heatmap": _render_sobol_heatmap,
    "pdp-ice": _render_pdp_ice,
    "uncertainty": _render_uncertainty,
}
