"""Monte Carlo experiments: estimation accuracy, interval coverage, sweeps.

Every replication is a pure function of ``(design, base_seed, design index,
replication index)``, so results are identical whatever the worker count.
Workers only change wall time; rows are always reduced in index order.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ._rng import derive_seed
from .changepoint import algorithm1, update_step
from .datagen import DesignSpec, NoiseFamily, gen_series
from .inference import DegenerateJumpError, confidence_interval, plugin_estimates
from .limitdist import IncrementLaw, RegimeKind, RwConfig
from .mean_estimation import default_lambda_grid

@dataclass(frozen=True)
class ExperimentConfig:
    designs: list[DesignSpec]
    replications_est: int = 100
    replications_inf: int = 500
    alpha: float = 0.05
    regimes: tuple[RegimeKind, ...] = (RegimeKind.VANISHING, RegimeKind.NONVANISHING)
    base_seed: int = 0
    output_path: str = "results"
    rw_replications: int = 3000
    workers: int = 1

    def __post_init__(self):
        if self.replications_est < 1 or self.replications_inf < 1:
            raise ValueError("replication counts must be >= 1")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        object.__setattr__(self, "regimes", tuple(RegimeKind(r) for r in self.regimes))


@dataclass(frozen=True)
class MetricRow:
    design: int
    method: str
    reps: int
    bias: float | None = None
    rmse: float | None = None
    mean_time_s: float | None = None
    coverage: float | None = None
    avg_margin: float | None = None
    degenerate: int = 0
    spec: DesignSpec | None = field(default=None, compare=False)


def design_label(spec: DesignSpec) -> dict:
    return {"T": spec.t_len, "p": spec.dim, "tau0": spec.tau0, "family": spec.family.value, "scale_c": spec.scale_c}


def rep_seed(base_seed: int, design_idx: int, rep: int) -> int:
    return derive_seed(base_seed, design_idx, rep)


# replication workers (module level so they pickle)

def _estimation_rep(args) -> dict:
    spec, design_idx, rep, base_seed = args
    seed = rep_seed(base_seed, design_idx, rep)
    data = gen_series(replace(spec, seed=seed))
    fit = algorithm1(data.series)
    return {"design": design_idx, "rep": rep, "seed": seed, "tau0": spec.tau0,
            "step1_tau": fit.step1_tau, "al1_tau": fit.step2_tau, "time_s": fit.elapsed_seconds}


def _inference_rep(args) -> list[dict]:
    spec, design_idx, rep, base_seed, alpha, regimes, rw_reps = args
    seed = rep_seed(base_seed, design_idx, rep)
    data = gen_series(replace(spec, seed=seed))
    fit = algorithm1(data.series)
    law = IncrementLaw.GAUSSIAN if spec.family is NoiseFamily.GAUSSIAN else IncrementLaw.LAPLACE
    rw = RwConfig(replications=rw_reps, seed=derive_seed(seed, 1))
    rows = []
    try:
        est = plugin_estimates(data.series, fit)
    except DegenerateJumpError:
        est = None
    for kind in regimes:
        row = {"design": design_idx, "rep": rep, "seed": seed, "tau0": spec.tau0, "al1_tau": fit.step2_tau,
               "regime": kind.value}
        if est is None or not est[0].xi > 0:
            row.update(degenerate=1, quantile=None, margin=None, lo=None, hi=None, hit=None)
        else:
            ci = confidence_interval(data.series, fit, kind, alpha, law, rw, estimates=est)
            row.update(degenerate=0, quantile=ci.quantile, margin=ci.margin, lo=ci.lo, hi=ci.hi,
                       hit=int(ci.covers(spec.tau0)))
        rows.append(row)
    return rows


def _map(fn, jobs, workers: int):
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def estimation_rows(cfg: ExperimentConfig) -> list[dict]:
    jobs = [(spec, d, r, cfg.base_seed) for d, spec in enumerate(cfg.designs) for r in range(cfg.replications_est)]
    return _map(_estimation_rep, jobs, cfg.workers)


def inference_rows(cfg: ExperimentConfig) -> list[dict]:
    jobs = [(spec, d, r, cfg.base_seed, cfg.alpha, cfg.regimes, cfg.rw_replications)
            for d, spec in enumerate(cfg.designs) for r in range(cfg.replications_inf)]
    return [row for rows in _map(_inference_rep, jobs, cfg.workers) for row in rows]


def aggregate_estimation(rows: list[dict], designs: list[DesignSpec]) -> list[MetricRow]:
    out = []
    for d, spec in enumerate(designs):
        mine = [r for r in rows if r["design"] == d]
        times = np.array([r["time_s"] for r in mine])
        for method, key in (("Step1", "step1_tau"), ("AL1", "al1_tau")):
            err = np.array([r[key] - r["tau0"] for r in mine], dtype=float)
            out.append(MetricRow(design=d, method=method, reps=len(mine), bias=float(abs(err.mean())),
                                 rmse=float(math.sqrt(np.mean(err ** 2))), mean_time_s=float(times.mean()),
                                 spec=spec))
    return out


def aggregate_inference(rows: list[dict], designs: list[DesignSpec], regimes) -> list[MetricRow]:
    out = []
    for d, spec in enumerate(designs):
        for kind in regimes:
            mine = [r for r in rows if r["design"] == d and r["regime"] == kind.value]
            valid = [r for r in mine if not r["degenerate"]]
            cov = float(np.mean([r["hit"] for r in valid])) if valid else float("nan")
            marg = float(np.mean([r["margin"] for r in valid])) if valid else float("nan")
            out.append(MetricRow(design=d, method=kind.value.upper(), reps=len(mine), coverage=cov,
                                 avg_margin=marg, degenerate=len(mine) - len(valid), spec=spec))
    return out


def run_estimation_experiment(cfg: ExperimentConfig, out_dir: str | os.PathLike | None = None) -> list[MetricRow]:
    rows = estimation_rows(cfg)
    metrics = aggregate_estimation(rows, cfg.designs)
    if out_dir is not None:
        from .io import write_estimation_outputs
        write_estimation_outputs(Path(out_dir), rows, metrics)
    return metrics


def run_inference_experiment(cfg: ExperimentConfig, out_dir: str | os.PathLike | None = None) -> list[MetricRow]:
    rows = inference_rows(cfg)
    metrics = aggregate_inference(rows, cfg.designs, cfg.regimes)
    if out_dir is not None:
        from .io import write_inference_outputs
        write_inference_outputs(Path(out_dir), rows, metrics)
    return metrics


def scaling_designs(base: DesignSpec, scales) -> list[DesignSpec]:
    for c in scales:
        if not 0 < c:
            raise ValueError(f"scale multipliers must be positive, got {c}")
    return [replace(base, scale_c=float(c)) for c in scales]


def default_scale_grid(count: int = 25) -> np.ndarray:
    return np.linspace(0.25, 2.0, count)


def run_scaling_sweep(cfg: ExperimentConfig, scales=None, out_dir=None) -> tuple[list[MetricRow], list[MetricRow]]:
    """Estimation and inference metrics for each jump multiplier ``c``.

    ``cfg.designs[0]`` is the base design; one design per multiplier is derived
    from it. Returns ``(estimation_rows, inference_rows)``.
    """
    scales = default_scale_grid() if scales is None else scales
    sweep = replace(cfg, designs=scaling_designs(cfg.designs[0], scales))
    est = run_estimation_experiment(sweep, None if out_dir is None else Path(out_dir) / "scaling_estimation")
    inf = run_inference_experiment(sweep, None if out_dir is None else Path(out_dir) / "scaling_inference")
    return est, inf


def run_initializer_sweep(spec: DesignSpec, init_grid=None, series=None) -> list[tuple[int, int]]:
    """Step-1 estimate from each initial split on one fixed dataset.

    Returns ``(init_tau, step1_tau)`` pairs; ``spec.tau0`` is the reference line.
    """
    x = series if series is not None else gen_series(spec).series
    T = x.t_len
    init_grid = range(1, T) if init_grid is None else init_grid
    grid = default_lambda_grid()
    out = []
    for init in init_grid:
        if not 1 <= init <= T - 1:
            raise ValueError(f"initializer {init} outside [1, {T - 1}]")
        tau1, _, _ = update_step(x, int(init), grid)
        out.append((int(init), tau1))
    return out


def metrics_to_records(metrics: list[MetricRow]) -> list[dict]:
    recs = []
    for m in metrics:
        rec = {"design": m.design, **(design_label(m.spec) if m.spec else {}), "method": m.method, "reps": m.reps}
        for k in ("bias", "rmse", "mean_time_s", "coverage", "avg_margin"):
            v = getattr(m, k)
            if v is not None:
                rec[k] = v
        if m.coverage is not None:
            rec["degenerate"] = m.degenerate
        recs.append(rec)
    return recs


def metrics_json(metrics: list[MetricRow]) -> str:
    return json.dumps(metrics_to_records(metrics), indent=2, sort_keys=False)
