"""Command-line entry point for the full exploration toolkit."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from ecosweep import __version__
from ecosweep.analysis import (
    UncertaintyDecomposition,
    detect_tipping_points,
    pdp_ice,
    sobol_indices,
)
from ecosweep.analysis.uncertainty import config_targets
from ecosweep.design import lhs_sample, load_design, save_design
from ecosweep.errors import DataError, EcosweepError, NumericError
from ecosweep.pipeline import (
    PipelineConfig,
    _uncertainty_slice,
    _write_curves,
    _write_field,
    cmd_pipeline,
    cmd_report,
)
from ecosweep.provenance import (
    fmt_float,
    provenance_dict,
    read_csv,
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
from ecosweep.sim import SimConfig, SpeciesConstants, simulate_trajectory
from ecosweep.space import ParameterSpace, default_space, refine_space
from ecosweep.surrogate import MLPSurrogate, cross_validate, load_model, save_model

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _load_space(path) -> ParameterSpace:
    payload = read_json(path)
    if "space" in payload:
        payload = payload["space"]
    return ParameterSpace.from_dict(payload)


def _parse_clips(values) -> list[tuple[str, float, float]]:
    clips = []
    for text in values or []:
        try:
            name, _, rng = text.partition("=")
            lo, _, hi = rng.partition(":")
            clips.append((name.strip(), float(lo), float(hi)))
        except ValueError:
            raise DataError(f"bad clip {text!r}; expected DIM=LO:HI") from None
    return clips


def _load_constants(path) -> SpeciesConstants:
    if path is None:
        return SpeciesConstants()
    import yaml

    payload = yaml.safe_load(Path(path).read_text()) or {}
    return SpeciesConstants.from_dict(payload)


def cmd_design(args) -> int:
    space = _load_space(args.space) if args.space else default_space()
    clips = _parse_clips(args.clip)
    if clips:
        space = refine_space(space, clips)
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else list(space.seed_levels)
    design = lhs_sample(space, args.n, args.design_seed)
    save_design(design, args.out, seeds=seeds)
    print(f"wrote {args.n} configs x {len(seeds)} seeds to {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    _, rows = load_design(args.design)
    space = _load_space(str(args.design) + ".meta.json")
    constants = _load_constants(args.constants)
    template = SimConfig(
        params=np.zeros(13), seed=0, grid_side=args.grid_side,
        max_ticks=args.max_ticks, constants=constants,
    )
    ds = run_batch(rows, template, workers=args.workers, space=space, progress=True)
    ds.provenance = provenance_dict(
        {"design": str(args.design), "max_ticks": args.max_ticks,
         "grid_side": args.grid_side, "constants": constants.to_dict()},
        seeds=sorted(set(int(s) for s in ds.seeds)),
    )
    save_dataset(ds, args.out)
    if args.dump_trajectories:
        traj_dir = Path(args.dump_trajectories)
        traj_dir.mkdir(parents=True, exist_ok=True)
        for config_id, params, seed in rows:
            cfg = template.with_params(params, seed)
            _, traj = simulate_trajectory(cfg)
            header = ["tick", "prey_count", "pred_count", "total_grass"]
            out_rows = [[str(int(t)), str(int(a)), str(int(b)), fmt_float(g)]
                        for t, a, b, g in traj]
            write_csv(traj_dir / f"traj_{config_id}_{seed}.csv", header, out_rows,
                      ds.provenance)
    print(f"wrote {len(ds)} run records to {args.out}")
    return EXIT_OK


def cmd_screen(args) -> int:
    ds = load_dataset(args.data)
    prov = provenance_dict({"data": str(args.data), "mode": args.mode})
    if args.mode == "aleatoric":
        payload = {"provenance": prov, **bayes_limit(ds).to_dict()}
    elif args.mode == "anova":
        payload = {"provenance": prov, **anova_type2(ds).to_dict()}
    elif args.mode == "chi2":
        chi2, p = chi2_seed_independence(ds)
        payload = {"provenance": prov, "chi2": chi2, "p": p}
    elif args.mode == "tree":
        est, _, _ = fit_tree(ds, max_depth=args.max_depth, min_leaf=args.min_leaf)
        names = list(ds.space.names)
        rules = extract_thresholds(est.tree_, names)
        payload = {
            "provenance": prov,
            "tree": est.tree_.to_dict(names),
            "rules": [
                {"condition": r.condition_text(), "mean": r.leaf_mean,
                 "count": r.leaf_count, "effect_mass": r.effect_mass}
                for r in rules
            ],
        }
        if args.rules_out:
            Path(args.rules_out).write_text(format_rules(est.tree_, names) + "\n")
    else:  # nstar
        payload = {"provenance": prov,
                   **required_replicates(ds, z=args.z, epsilon=args.epsilon).to_dict()}
    if args.out:
        write_json(args.out, payload)
        print(f"wrote {args.mode} report to {args.out}")
    else:
        import json

        print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def _surrogate_kwargs(args) -> dict:
    return {
        "epochs": args.epochs, "batch_size": args.batch, "lr": args.lr,
        "l2": args.l2, "train_seed": args.train_seed,
        "class_weight": "balanced" if args.balanced else None,
        "hidden": tuple(int(h) for h in args.hidden.split(",")),
    }


def cmd_surrogate(args) -> int:
    if args.mode in ("train", "predict") and not args.model:
        raise DataError(f"surrogate {args.mode} requires --model")
    if args.mode in ("train", "cv") and not args.data:
        raise DataError(f"surrogate {args.mode} requires --data")
    if args.mode in ("cv", "predict") and not args.out:
        raise DataError(f"surrogate {args.mode} requires --out")
    if args.mode == "predict":
        model = load_model(args.model)
        _, header, raw = read_csv(args.infile)
        cols = [header.index(n) for n in default_space().names if n in header]
        if len(cols) != model.scale_lo_.shape[0]:
            raise DataError(f"input {args.infile} lacks the model's parameter columns")
        X = np.array([[float(r[c]) for c in cols] for r in raw])
        probs = model.predict_proba(X)
        out_rows = [[fmt_float(v) for v in row] for row in probs]
        write_csv(args.out, ["p_extinction", "p_prey_survival", "p_coexistence"],
                  out_rows, provenance_dict({"model": str(args.model)}))
        print(f"wrote {len(probs)} predictions to {args.out}")
        return EXIT_OK

    ds = load_dataset(args.data)
    kwargs = _surrogate_kwargs(args)
    if args.mode == "train":
        model = MLPSurrogate(bounds=ds.space.bounds(), **kwargs)
        model.fit(ds.params, (ds.scores * 2).astype(int))
        save_model(model, args.model)
        print(f"trained surrogate (final loss "
              f"{model.training_meta_['final_loss']:.4f}) -> {args.model}")
    else:  # cv
        report = cross_validate(ds, k=args.folds, cv_seed=args.cv_seed, **kwargs)
        payload = {"provenance": provenance_dict({"data": str(args.data)}),
                   **report.to_dict()}
        write_json(args.out, payload)
        print(f"cv mean accuracy {report.mean_accuracy:.3f} -> {args.out}")
    return EXIT_OK


def cmd_gsa(args) -> int:
    model = load_model(args.model)
    space = _load_space(args.space)
    order = {"1": "first", "first": "first", "total": "total",
             "2": "second", "second": "second"}.get(args.order)
    if order is None:
        raise DataError(f"unknown order {args.order!r}")
    indices = sobol_indices(model.coexistence_probability, space, M=args.M,
                            order=order, gsa_seed=args.gsa_seed,
                            n_bootstrap=args.bootstrap)
    payload = {"provenance": provenance_dict({"model": str(args.model), "M": args.M}),
               **indices.to_dict()}
    write_json(args.out, payload)
    ranked = indices.ranked_by_st()[:5]
    print("top ST: " + ", ".join(f"{n}={st:.2f}" for n, _, st in ranked))
    return EXIT_OK


def cmd_explain(args) -> int:
    model = load_model(args.model)
    ds = load_dataset(args.data)
    curves = pdp_ice(model.coexistence_probability, ds, args.dim,
                     grid_size=args.grid, ice_subsample=args.ice,
                     color_dim=args.color_by, subsample_seed=args.subsample_seed)
    _write_curves(args.out, curves,
                  provenance_dict({"model": str(args.model), "dim": args.dim}))
    print(f"wrote pdp/ice curves for {args.dim} to {args.out}")
    return EXIT_OK


def cmd_uq(args) -> int:
    ds = load_dataset(args.data)
    model = load_model(args.model)
    estimator = UncertaintyDecomposition(
        alpha=args.alpha, n_trees=args.n_trees, min_leaf=args.min_leaf,
        calib_fraction=args.calib_fraction, seed=args.uq_seed,
    )
    X, p_hat, s = config_targets(ds)
    estimator.fit(X, p_hat, s)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dims = args.dims.split(",") if args.dims else list(ds.space.names)
    prov = provenance_dict({"data": str(args.data), "alpha": args.alpha})
    tipping = []
    for dim in dims:
        rows, sigma_total = _uncertainty_slice(estimator, ds, ds.space, dim,
                                               args.grid, args.ice)
        _write_field(out_dir / f"uncertainty_{dim}.csv", dim, rows, prov)
        curves = pdp_ice(model.coexistence_probability, ds, dim,
                         grid_size=args.grid, ice_subsample=args.ice)
        grid = np.array([r[0] for r in rows])
        for tp in detect_tipping_points(dim, grid, curves.pdp, sigma_total):
            tipping.append(tp.to_dict())
    tipping.sort(key=lambda t: -t["magnitude"])
    write_json(out_dir / "tipping_points.json",
               {"provenance": prov, "tipping_points": tipping})
    print(f"wrote uncertainty fields for {len(dims)} dims to {out_dir}")
    return EXIT_OK


def cmd_pipeline_cli(args) -> int:
    cfg = PipelineConfig.from_yaml(args.config, output_override=args.out)
    return cmd_pipeline(cfg)


def cmd_report_cli(args) -> int:
    print(cmd_report(args.dir))
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="ecosweep",
                     description="Predator-prey simulation exploration toolkit")
    parser.add_argument("--version", action="version", version=f"ecosweep {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="sample a replicated LHS design")
    p.add_argument("--space", help="space JSON (default: full experimental space)")
    p.add_argument("-n", type=int, required=True, help="number of configurations")
    p.add_argument("--seeds", help="comma-separated seed list (default: space seeds)")
    p.add_argument("--design-seed", type=int, default=0)
    p.add_argument("--clip", action="append", help="refine a dim: DIM=LO:HI")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", help="run a design through the simulator")
    p.add_argument("--design", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--constants", help="YAML file of species-constant overrides")
    p.add_argument("--max-ticks", type=int, default=1000)
    p.add_argument("--grid-side", type=int, default=60)
    p.add_argument("--dump-trajectories", help="directory for per-run trajectories")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("screen", help="phase-1 model-based screening reports")
    p.add_argument("mode", choices=["aleatoric", "anova", "chi2", "tree", "nstar"])
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.add_argument("--z", type=float, default=1.96)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--min-leaf", type=int, default=20)
    p.add_argument("--rules-out", help="also write indented tree rules (tree mode)")
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("surrogate", help="train/validate/apply the MLP surrogate")
    p.add_argument("mode", choices=["train", "cv", "predict"])
    p.add_argument("--data")
    p.add_argument("--model", help="model file (train/predict modes)")
    p.add_argument("--in", dest="infile", help="points CSV (predict mode)")
    p.add_argument("--out", help="output file (cv/predict modes)")
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--train-seed", type=int, default=0)
    p.add_argument("--hidden", default="128,128")
    p.add_argument("--balanced", action="store_true",
                   help="inverse-frequency class weights")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--cv-seed", type=int, default=0)
    p.set_defaults(func=cmd_surrogate)

    p = sub.add_parser("gsa", help="global sensitivity analysis of the surrogate")
    p.add_argument("mode", choices=["sobol"])
    p.add_argument("--model", required=True)
    p.add_argument("--space", required=True)
    p.add_argument("-M", type=int, default=16384, help="base sample count")
    p.add_argument("--order", default="total", help="1, total or 2")
    p.add_argument("--gsa-seed", type=int, default=0)
    p.add_argument("--bootstrap", type=int, default=0,
                   help="bootstrap resamples for S1/ST confidence intervals")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gsa)

    p = sub.add_parser("explain", help="pdp/ice response curves")
    p.add_argument("mode", choices=["pdp-ice"])
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--dim", required=True)
    p.add_argument("--color-by")
    p.add_argument("--grid", type=int, default=40)
    p.add_argument("--ice", type=int, default=200)
    p.add_argument("--subsample-seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("uq", help="aleatoric/epistemic uncertainty decomposition")
    p.add_argument("mode", choices=["decompose"])
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--dims", help="comma-separated dims (default: all)")
    p.add_argument("--grid", type=int, default=40)
    p.add_argument("--ice", type=int, default=200)
    p.add_argument("--n-trees", type=int, default=200)
    p.add_argument("--min-leaf", type=int, default=5)
    p.add_argument("--calib-fraction", type=float, default=0.25)
    p.add_argument("--uq-seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_uq)

    p = sub.add_parser("pipeline", help="run the full two-phase workflow")
    p.add_argument("--config", required=True, help="pipeline YAML")
    p.add_argument("--out", help="override the config's output_dir")
    p.set_defaults(func=cmd_pipeline_cli)

    p = sub.add_parser("report", help="summarize a pipeline output directory")
    p.add_argument("--dir", required=True)
    p.set_defaults(func=cmd_report_cli)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"ecosweep: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DataError as exc:
        print(f"ecosweep: {exc}", file=sys.stderr)
        return EXIT_DATA
    except EcosweepError as exc:
        print(f"ecosweep: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"ecosweep: missing file: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
