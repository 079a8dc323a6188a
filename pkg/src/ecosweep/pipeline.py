"""Two-phase workflow orchestration: screen, refine, then surrogate analysis."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from ecosweep import __version__
from ecosweep.analysis import (
    UncertaintyDecomposition,
    detect_tipping_points,
    pdp_ice,
    sobol_indices,
)
from ecosweep.analysis.uncertainty import config_targets
from ecosweep.design import lhs_sample, load_design, save_design
from ecosweep.errors import DataError, SchemaError
from ecosweep.provenance import (
    fmt_float,
    provenance_dict,
    read_json,
    write_csv,
    write_json,
)
from ecosweep.runner import load_dataset, run_batch, save_dataset
from ecosweep.screening import (
    anova_type2,
    bayes_limit,
    chi2_seed_independence,
    extract_thresholds,
    fit_tree,
    format_rules,
    required_replicates,
)
from ecosweep.sim import SimConfig, SpeciesConstants
from ecosweep.space import ParameterSpace, default_space, refine_space
from ecosweep.surrogate import MLPSurrogate, cross_validate, save_model

SCHEMA_VERSION = 1

PHASE1_ARTIFACTS = (
    "phase1/design.csv", "phase1/dataset.csv", "phase1/aleatoric.json",
    "phase1/anova.json", "phase1/chi2.json", "phase1/tree.json",
    "phase1/tree_rules.txt", "phase1/nstar.json", "phase1/refinement.json",
)
PHASE2_BASE_ARTIFACTS = (
    "phase2/space.json", "phase2/design.csv", "phase2/dataset.csv",
    "phase2/model.npz", "phase2/cv.json", "phase2/sobol.json",
    "phase2/tipping_points.json",
)


@dataclass
class PipelineConfig:
    output_dir: Path
    space: ParameterSpace
    workers: int = 1
    grid_side: int = 60
    max_ticks: int = 1000
    constants: SpeciesConstants = field(default_factory=SpeciesConstants)
    phase1_n: int = 650
    phase1_seeds: tuple = (1, 2, 3, 4, 5)
    phase1_design_seed: int = 101
    z: float = 1.96
    epsilon: float = 0.1
    tree_max_depth: int = 4
    tree_min_leaf: int = 20
    clips: list | None = None
    phase2_n: int = 650
    phase2_seeds: tuple = tuple(range(1, 21))
    phase2_design_seed: int = 202
    surrogate: dict = field(default_factory=dict)
    cv_folds: int = 10
    cv_seed: int = 0
    gsa_m: int = 16384
    gsa_order: str = "second"
    gsa_seed: int = 0
    explain_dims: list | str = "auto"
    explain_color_by: str | None = "BG"
    explain_grid: int = 40
    explain_ice: int = 200
    uq_alpha: float = 0.1
    uq_hyper: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_yaml(cls, path, output_override=None) -> "PipelineConfig":
        path = Path(path)
        if not path.exists():
            raise DataError(f"pipeline config {path} does not exist")
        payload = yaml.safe_load(path.read_text())
        if not isinstance(payload, dict):
            raise SchemaError(f"pipeline config {path} is not a mapping")
        version = payload.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SchemaError(f"unsupported pipeline schema_version {version!r}")

        space_field = payload.get("space")
        if space_field is None:
            space = default_space()
        elif isinstance(space_field, str):
            space_path = (path.parent / space_field).resolve()
            if not space_path.exists():
                raise DataError(f"space file {space_path} does not exist")
            import json

            space_payload = json.loads(space_path.read_text())
            space = ParameterSpace.from_dict(space_payload.get("space", space_payload))
        else:
            space = ParameterSpace.from_dict(space_field)
        sim = payload.get("sim", {})
        constants = SpeciesConstants.from_dict(sim.get("constants", {}))
        p1 = payload.get("phase1", {})
        p2 = payload.get("phase2", {})
        scr = payload.get("screening", {})
        sur = dict(payload.get("surrogate", {}))
        gsa = payload.get("gsa", {})
        exp = payload.get("explain", {})
        uq = dict(payload.get("uq", {}))

        clips = None
        refine = payload.get("refine", {})
        if refine and refine.get("clips"):
            clips = [(name, float(lo), float(hi))
                     for name, (lo, hi) in sorted(refine["clips"].items())]

        out = Path(output_override) if output_override else Path(payload.get("output_dir", "ecosweep-out"))
        cfg = cls(
            output_dir=out,
            space=space,
            workers=int(payload.get("workers", 1)),
            grid_side=int(sim.get("grid_side", 60)),
            max_ticks=int(sim.get("max_ticks", 1000)),
            constants=constants,
            phase1_n=int(p1.get("n_configs", 650)),
            phase1_seeds=tuple(p1.get("seeds", [1, 2, 3, 4, 5])),
            phase1_design_seed=int(p1.get("design_seed", 101)),
            z=float(scr.get("z", 1.96)),
            epsilon=float(scr.get("epsilon", 0.1)),
            tree_max_depth=int(scr.get("max_depth", 4)),
            tree_min_leaf=int(scr.get("min_leaf", 20)),
            clips=clips,
            phase2_n=int(p2.get("n_configs", 650)),
            phase2_seeds=tuple(p2.get("seeds", list(range(1, 21)))),
            phase2_design_seed=int(p2.get("design_seed", 202)),
            surrogate=sur,
            cv_folds=int(sur.pop("folds", 10)),
            cv_seed=int(sur.pop("cv_seed", 0)),
            gsa_m=int(gsa.get("M", 16384)),
            gsa_order=str(gsa.get("order", "second")),
            gsa_seed=int(gsa.get("gsa_seed", 0)),
            explain_dims=exp.get("dims", "auto"),
            explain_color_by=exp.get("color_by", "BG"),
            explain_grid=int(exp.get("grid", 40)),
            explain_ice=int(exp.get("ice", 200)),
            uq_alpha=float(uq.pop("alpha", 0.1)),
            uq_hyper=uq,
            raw=payload,
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        names = self.space.names
        for name, lo, hi in (self.clips or []):
            if name not in names:
                raise DataError(f"refine clip references unknown dim {name!r}")
        if isinstance(self.explain_dims, list):
            for name in self.explain_dims:
                if name not in names:
                    raise DataError(f"explain dim {name!r} not in space")
        if self.explain_color_by is not None and self.explain_color_by not in names:
            raise DataError(f"color_by dim {self.explain_color_by!r} not in space")

    def config_hash_payload(self) -> dict:
        return self.raw


def _stage(msg: str) -> None:
    print(f"[pipeline] {msg}", file=sys.stderr)


def _sim_template(cfg: PipelineConfig, space: ParameterSpace) -> SimConfig:
    lower, _ = space.bounds()
    full = np.zeros(len(default_space().names))
    full[: len(lower)] = lower
    return SimConfig(params=full, seed=0, grid_side=cfg.grid_side,
                     max_ticks=cfg.max_ticks, constants=cfg.constants)


def run_phase1(cfg: PipelineConfig) -> None:
    out = cfg.output_dir / "phase1"
    out.mkdir(parents=True, exist_ok=True)
    prov = provenance_dict(cfg.config_hash_payload(), seeds=cfg.phase1_seeds)

    _stage(f"phase1 design: {cfg.phase1_n} configs x {len(cfg.phase1_seeds)} seeds")
    design = lhs_sample(cfg.space, cfg.phase1_n, cfg.phase1_design_seed)
    save_design(design, out / "design.csv", seeds=cfg.phase1_seeds)

    _stage("phase1 simulate")
    _, rows = load_design(out / "design.csv")
    ds = run_batch(rows, _sim_template(cfg, cfg.space), workers=cfg.workers,
                   space=cfg.space, progress=True)
    ds.provenance = prov
    save_dataset(ds, out / "dataset.csv")

    _stage("phase1 screening")
    ds = load_dataset(out / "dataset.csv")
    rep = bayes_limit(ds)
    write_json(out / "aleatoric.json", {"provenance": prov, **rep.to_dict()})
    anova = anova_type2(ds)
    write_json(out / "anova.json", {"provenance": prov, **anova.to_dict()})
    chi2, p = chi2_seed_independence(ds)
    write_json(out / "chi2.json", {"provenance": prov, "chi2": chi2, "p": p})
    est, _, _ = fit_tree(ds, max_depth=cfg.tree_max_depth, min_leaf=cfg.tree_min_leaf)
    write_json(out / "tree.json",
               {"provenance": prov, "tree": est.tree_.to_dict(list(ds.space.names))})
    from ecosweep.provenance import provenance_lines

    (out / "tree_rules.txt").write_text(
        "\n".join(provenance_lines(prov)) + "\n"
        + format_rules(est.tree_, list(ds.space.names)) + "\n")
    nstar = required_replicates(ds, z=cfg.z, epsilon=cfg.epsilon)
    write_json(out / "nstar.json", {"provenance": prov, **nstar.to_dict()})

    rules = extract_thresholds(est.tree_, list(ds.space.names))
    global_mean = float(ds.scores.mean())
    suggestions = []
    for rule in rules:
        if rule.leaf_mean < global_mean and rule.conditions:
            suggestions.append({
                "avoid": rule.condition_text(),
                "leaf_mean": rule.leaf_mean,
                "leaf_count": rule.leaf_count,
            })
    write_json(out / "refinement.json", {
        "provenance": prov,
        "global_mean_score": global_mean,
        "low_score_regions": suggestions,
        "note": "pass clips via the pipeline config refine.clips to continue to phase 2",
    })


def run_phase2(cfg: PipelineConfig) -> None:
    out = cfg.output_dir / "phase2"
    out.mkdir(parents=True, exist_ok=True)
    prov = provenance_dict(cfg.config_hash_payload(), seeds=cfg.phase2_seeds)
    space2 = refine_space(cfg.space, cfg.clips or [])
    write_json(out / "space.json", {"provenance": prov, **space2.to_dict()})

    _stage(f"phase2 design: {cfg.phase2_n} configs x {len(cfg.phase2_seeds)} seeds")
    design = lhs_sample(space2, cfg.phase2_n, cfg.phase2_design_seed)
    save_design(design, out / "design.csv", seeds=cfg.phase2_seeds)

    _stage("phase2 simulate")
    _, rows = load_design(out / "design.csv")
    ds = run_batch(rows, _sim_template(cfg, space2), workers=cfg.workers,
                   space=space2, progress=True)
    ds.provenance = prov
    save_dataset(ds, out / "dataset.csv")

    _stage("phase2 surrogate train + cv")
    ds = load_dataset(out / "dataset.csv")
    y = (ds.scores * 2).astype(int)
    model = MLPSurrogate(bounds=space2.bounds(), **cfg.surrogate)
    model.fit(ds.params, y)
    save_model(model, out / "model.npz")
    cv = cross_validate(ds, k=cfg.cv_folds, cv_seed=cfg.cv_seed, **cfg.surrogate)
    write_json(out / "cv.json", {"provenance": prov, **cv.to_dict()})

    _stage(f"phase2 sobol (M={cfg.gsa_m}, order={cfg.gsa_order})")
    oracle = model.coexistence_probability
    sobol = sobol_indices(oracle, space2, M=cfg.gsa_m, order=cfg.gsa_order,
                          gsa_seed=cfg.gsa_seed)
    write_json(out / "sobol.json", {"provenance": prov, **sobol.to_dict()})

    if cfg.explain_dims == "auto":
        dims = [name for name, _, _ in sobol.ranked_by_st()[:6]]
    else:
        dims = list(cfg.explain_dims)

    _stage(f"phase2 pdp/ice + uq over {dims}")
    estimator = UncertaintyDecomposition(alpha=cfg.uq_alpha, **cfg.uq_hyper)
    X_cfg, p_hat, s = config_targets(ds)
    estimator.fit(X_cfg, p_hat, s)

    tipping_all = []
    for dim in dims:
        color = cfg.explain_color_by
        if color == dim or color not in space2.names:
            color = None if color != dim else dim
        curves = pdp_ice(oracle, ds, dim, grid_size=cfg.explain_grid,
                         ice_subsample=cfg.explain_ice, color_dim=color)
        _write_curves(out / f"pdp_ice_{dim}.csv", curves, prov)
        field_rows, sigma_total = _uncertainty_slice(estimator, ds, space2, dim,
                                                     cfg.explain_grid, cfg.explain_ice)
        _write_field(out / f"uncertainty_{dim}.csv", dim, field_rows, prov)
        grid = np.array([r[0] for r in field_rows])
        pdp_on_grid = curves.pdp if len(curves.grid) == len(grid) else None
        if pdp_on_grid is None:
            continue
        for tp in detect_tipping_points(dim, grid, pdp_on_grid, sigma_total):
            tipping_all.append(tp.to_dict())
    tipping_all.sort(key=lambda t: -t["magnitude"])
    write_json(out / "tipping_points.json", {"provenance": prov, "tipping_points": tipping_all})


def _uncertainty_slice(estimator, ds, space, dim, grid_size, ice_subsample):
    """Marginal-mean sigma slices along one dim over the ICE instance set."""
    j = space.index(dim)
    lo, hi = space.dims[j].lower, space.dims[j].upper
    grid = np.linspace(lo, hi, grid_size)
    ids, rows = ds.config_matrix()
    if ice_subsample and ice_subsample < len(ids):
        rng = np.random.default_rng(0)
        keep = np.sort(rng.choice(len(ids), size=ice_subsample, replace=False))
        rows = rows[keep]
    out_rows = []
    sigma_totals = np.empty(len(grid))
    work = rows.copy()
    for g, value in enumerate(grid):
        work[:, j] = value
        fld = estimator.predict(work)
        sa = float(fld.sigma_aleatoric.mean())
        se = float(fld.sigma_epistemic.mean())
        stot = float(np.sqrt(sa ** 2 + se ** 2))
        sigma_totals[g] = stot
        out_rows.append((float(value), sa, se, stot))
        work[:, j] = rows[:, j]
    return out_rows, sigma_totals


def _write_curves(path, curves, prov) -> None:
    header = ["dim", "curve_id", "grid_index", "grid_value", "value", "color_value"]
    rows = []
    for curve_id, gi, gv, val, color in curves.to_rows():
        rows.append([curves.dim, curve_id, str(gi), fmt_float(gv), fmt_float(val),
                     "" if color is None else fmt_float(color)])
    write_csv(path, header, rows, prov)


def _write_field(path, dim, field_rows, prov) -> None:
    header = ["dim", "grid_index", "grid_value", "sigma_aleatoric",
              "sigma_epistemic", "sigma_total"]
    rows = []
    for gi, (gv, sa, se, stot) in enumerate(field_rows):
        rows.append([dim, str(gi), fmt_float(gv), fmt_float(sa), fmt_float(se),
                     fmt_float(stot)])
    write_csv(path, header, rows, prov)


def expected_artifacts(cfg: PipelineConfig) -> list[str]:
    arts = list(PHASE1_ARTIFACTS)
    if cfg.clips is not None:
        arts += list(PHASE2_BASE_ARTIFACTS)
        if cfg.explain_dims != "auto":
            for dim in cfg.explain_dims:
                arts.append(f"phase2/pdp_ice_{dim}.csv")
                arts.append(f"phase2/uncertainty_{dim}.csv")
    return arts


def cmd_pipeline(cfg: PipelineConfig) -> int:
    """Run the full two-phase workflow; stops after phase 1 without clips."""
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    stage = "phase1"
    try:
        run_phase1(cfg)
        if cfg.clips is None:
            _stage("no refine.clips in config: stopping after phase 1; "
                   "inspect phase1/refinement.json and rerun with clips")
            _write_manifest(cfg)
            return 0
        stage = "phase2"
        run_phase2(cfg)
        stage = "manifest"
        _write_manifest(cfg)
    except Exception as exc:
        raise type(exc)(f"[stage {stage}] {exc}") from exc
    return 0


def _write_manifest(cfg: PipelineConfig) -> None:
    entries = sorted(
        str(p.relative_to(cfg.output_dir))
        for p in cfg.output_dir.rglob("*")
        if p.is_file() and p.name != "manifest.json"
    )
    write_json(cfg.output_dir / "manifest.json", {
        "generator": f"ecosweep {__version__}",
        "config_hash": provenance_dict(cfg.config_hash_payload())["config_hash"],
        "artifacts": entries,
    })


def cmd_report(outdir) -> str:
    """Human-readable pipeline summary; lists any missing artifacts."""
    outdir = Path(outdir)
    if not outdir.exists():
        raise DataError(f"pipeline directory {outdir} does not exist")
    expected = list(PHASE1_ARTIFACTS) + list(PHASE2_BASE_ARTIFACTS)
    present = {rel for rel in expected if (outdir / rel).exists()}
    if not present:
        raise DataError(
            "no pipeline artifacts found; expected at least:\n  "
            + "\n  ".join(expected))

    lines = [f"pipeline report: {outdir}"]
    missing = [rel for rel in expected if rel not in present]

    def have(rel):
        return (outdir / rel).exists()

    if have("phase1/dataset.csv"):
        ds = load_dataset(outdir / "phase1/dataset.csv")
        counts = {label: ds.labels.count(label) for label in set(ds.labels)}
        lines.append(f"phase1: {len(ds)} runs over {ds.n_configs} configs; "
                     f"class balance {counts}")
    if have("phase1/aleatoric.json"):
        rep = read_json(outdir / "phase1/aleatoric.json")
        lines.append(f"phase1 aleatoric limit Acc_max = {rep['acc_max']:.3f}")
    if have("phase1/anova.json"):
        rep = read_json(outdir / "phase1/anova.json")
        top = sorted(rep["per_factor"], key=lambda e: -e["variance_share"])[:3]
        txt = ", ".join(f"{e['name']}={e['variance_share']:.1%}" for e in top)
        lines.append(f"phase1 anova top factors: {txt} (R2={rep['r_squared']:.2f})")
    if have("phase1/chi2.json"):
        rep = read_json(outdir / "phase1/chi2.json")
        lines.append(f"phase1 seed independence: chi2={rep['chi2']:.2f}, p={rep['p']:.3f}")
    if have("phase1/tree_rules.txt"):
        rules = [l for l in (outdir / "phase1/tree_rules.txt").read_text().splitlines()
                 if l and not l.startswith("#")]
        lines.append("phase1 tree: " + " | ".join(rules[:2]))
    if have("phase1/nstar.json"):
        rep = read_json(outdir / "phase1/nstar.json")
        lines.append(f"phase1 replication sizing: mean n*={rep['mean_nstar']:.2f} "
                     f"-> recommended n={rep['recommended_n']}")
    if have("phase2/dataset.csv"):
        ds = load_dataset(outdir / "phase2/dataset.csv")
        counts = {label: ds.labels.count(label) for label in set(ds.labels)}
        lines.append(f"phase2: {len(ds)} runs over {ds.n_configs} configs; "
                     f"class balance {counts}")
    if have("phase2/cv.json"):
        rep = read_json(outdir / "phase2/cv.json")
        lines.append(f"phase2 surrogate CV accuracy = {rep['mean_accuracy']:.3f}")
    if have("phase2/sobol.json"):
        rep = read_json(outdir / "phase2/sobol.json")
        st = sorted(rep["st"].items(), key=lambda kv: -kv[1])[:4]
        s1_sum = sum(rep["s1"].values())
        lines.append("phase2 sobol top ST: "
                     + ", ".join(f"{k}={v:.2f}" for k, v in st)
                     + f"; sum S1 = {s1_sum:.2f}")
    if have("phase2/tipping_points.json"):
        rep = read_json(outdir / "phase2/tipping_points.json")
        pts = rep["tipping_points"][:4]
        if pts:
            txt = ", ".join(f"{t['dim']}@{t['value']:.3g} ({t['kind']})" for t in pts)
        else:
            txt = "none detected"
        lines.append(f"phase2 tipping points: {txt}")
    if missing:
        lines.append("missing artifacts:")
        for rel in missing:
            lines.append(f"  - {rel}")
    return "\n".join(lines)
