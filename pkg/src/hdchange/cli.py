"""Command line entry point: ``estimate``, ``simulate``, ``quantile``, ``generate``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import io
from .changepoint import algorithm1, boundary_test
from .datagen import gen_series
from .harness import (
    default_scale_grid,
    run_estimation_experiment,
    run_inference_experiment,
    run_initializer_sweep,
    run_scaling_sweep,
)
from .inference import DegenerateJumpError, confidence_interval, plugin_estimates
from .limitdist import IncrementLaw, Regime, RegimeKind, RwConfig, quantile_nonvanishing, quantile_vanishing
from .model import center_columns

EXPERIMENTS = ("estimation", "inference", "scaling", "initializer")


def _regimes(choice: str) -> list[RegimeKind]:
    return [RegimeKind.VANISHING, RegimeKind.NONVANISHING] if choice == "both" else [RegimeKind(choice)]


def cmd_estimate(args) -> int:
    x = io.read_series_csv(args.input)
    if args.center:
        x = center_columns(x)
    fit = algorithm1(x, init_tau=args.init)
    intervals = []
    jump = var = None
    try:
        jump, var = plugin_estimates(x, fit)
    except DegenerateJumpError as exc:
        print(f"warning: {exc}; no interval reported", file=sys.stderr)
    if jump is not None:
        rw = RwConfig(replications=args.rw_reps, seed=args.seed)
        for kind in _regimes(args.regime):
            intervals.append(confidence_interval(x, fit, kind, args.alpha, args.law, rw, estimates=(jump, var)))
    boundary = None
    if args.boundary_gamma is not None:
        m = fit.step1_means
        boundary = boundary_test(x, m.theta1, m.theta2, args.boundary_gamma)
    result = io.fit_result_json(fit, jump, var, intervals, boundary)
    Path(args.output).write_text(json.dumps(result, indent=2) + "\n", encoding="utf-8")
    return 0


def cmd_simulate(args) -> int:
    kv = io.read_kv(args.config)
    cfg = io.experiment_from_kv(kv)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    wanted = [e.strip() for e in kv.get("experiments", "estimation,inference").split(",") if e.strip()]
    bad = sorted(set(wanted) - set(EXPERIMENTS))
    if bad:
        raise ValueError(f"unknown experiments: {', '.join(bad)}")
    out = Path(args.out_dir)
    if "estimation" in wanted:
        run_estimation_experiment(cfg, out / "estimation")
    if "inference" in wanted:
        run_inference_experiment(cfg, out / "inference")
    if "scaling" in wanted:
        scales = [float(s) for s in kv["scales"].split(",")] if "scales" in kv else default_scale_grid()
        run_scaling_sweep(cfg, scales, out)
    if "initializer" in wanted:
        grid = [int(g) for g in kv["init_grid"].split(",")] if "init_grid" in kv else None
        for d, spec in enumerate(cfg.designs):
            pairs = run_initializer_sweep(spec, grid)
            io.write_initializer_outputs(out / "initializer" / f"design{d}", spec, pairs)
    return 0


def cmd_quantile(args) -> int:
    kind = RegimeKind(args.regime)
    if kind is RegimeKind.VANISHING:
        q = quantile_vanishing(args.alpha, seed=args.seed)
    else:
        if args.xi is None or args.sigma2 is None:
            raise ValueError("--xi and --sigma2 are required for the nv regime")
        regime = Regime(kind, args.sigma2, args.xi, args.law)
        q = quantile_nonvanishing(regime, args.alpha, RwConfig(replications=args.reps, seed=args.seed))
    print(repr(q))
    return 0


def cmd_generate(args) -> int:
    spec = io.design_from_kv(io.read_kv(args.spec))
    data = gen_series(spec)
    io.write_series_csv(args.output, data.series)
    truth = {"tau0": data.tau0, "xi": data.xi, "theta1": data.theta1.tolist(), "theta2": data.theta2.tolist(),
             "t_len": spec.t_len, "dim": spec.dim, "family": spec.family.value, "seed": spec.seed}
    sidecar = Path(str(args.output) + ".truth.json")
    sidecar.write_text(json.dumps(truth, indent=2) + "\n", encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hdchange", description="Mean change point estimation and inference.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="fit one series and report intervals")
    p.add_argument("--input", required=True, help="series CSV (T rows, p columns)")
    p.add_argument("--center", action=argparse.BooleanOptionalAction, default=True,
                   help="subtract column means before fitting (default on)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--regime", choices=["v", "nv", "both"], default="both")
    p.add_argument("--law", choices=[m.value for m in IncrementLaw], default="gaussian")
    p.add_argument("--rw-reps", type=int, default=3000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", type=int, default=None, help="initial split (default floor(T/2))")
    p.add_argument("--boundary-gamma", type=float, default=None,
                   help="also run the no-change boundary test with this threshold")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="run Monte Carlo experiments from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--workers", type=int, default=None, help="override the config's worker count")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("quantile", help="print a limiting-law quantile")
    p.add_argument("--regime", choices=["v", "nv"], required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--xi", type=float, default=None)
    p.add_argument("--sigma2", type=float, default=None)
    p.add_argument("--law", choices=[m.value for m in IncrementLaw], default="gaussian")
    p.add_argument("--reps", type=int, default=3000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_quantile)

    p = sub.add_parser("generate", help="write a synthetic series and its ground truth")
    p.add_argument("--spec", required=True, help="key=value design file")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_generate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
