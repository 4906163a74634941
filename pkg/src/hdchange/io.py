"""File formats.

Series CSV
    Optional single header row, then ``T`` rows of ``p`` comma-separated
    decimal floats (UTF-8, ``.`` decimal point, no thousands separators).

Config files
    Flat ``key = value`` lines, ``#`` starts a comment. Keys are the field
    names of :class:`~hdchange.datagen.DesignSpec` and
    :class:`~hdchange.harness.ExperimentConfig`; design keys accept
    comma-separated lists and expand to their Cartesian product. Extra keys:
    ``experiments`` (``estimation,inference,scaling,initializer``),
    ``tau0_frac`` (alternative to ``tau0``, floored), ``scales`` and
    ``init_grid``.

Experiment outputs
    One directory per experiment with ``metrics.csv``, ``metrics.json`` and
    ``replications.csv`` whose bytes depend only on the configuration. Wall
    times go to a separate ``timing.csv``, which is excluded from that
    guarantee.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from pathlib import Path

import numpy as np

from .datagen import DesignSpec
from .harness import ExperimentConfig, MetricRow, metrics_to_records
from .model import SeriesMatrix

ESTIMATION_METRIC_COLUMNS = ["design", "T", "p", "tau0", "family", "scale_c", "method", "reps", "bias", "rmse"]
INFERENCE_METRIC_COLUMNS = ["design", "T", "p", "tau0", "family", "scale_c", "method", "reps", "degenerate",
                            "coverage", "avg_margin"]
ESTIMATION_REP_COLUMNS = ["design", "rep", "seed", "tau0", "step1_tau", "al1_tau"]
INFERENCE_REP_COLUMNS = ["design", "rep", "seed", "tau0", "al1_tau", "regime", "degenerate",
                         "quantile", "margin", "lo", "hi", "hit"]

_DESIGN_KEYS = {"t_len": int, "dim": int, "tau0": int, "s": int, "scale_c": float, "rho": float,
                "family": str, "seed": int, "noise_scale": float,
                "mean_profile": str}
_EXPERIMENT_KEYS = {"replications_est": int, "replications_inf": int, "alpha": float, "base_seed": int,
                    "output_path": str, "rw_replications": int, "workers": int}


# -- series ------------------------------------------------------------------

def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def read_series_csv(path) -> SeriesMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows and not all(_is_number(c) for c in rows[0]):
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise ValueError(f"{path}: row {i + 1} has {len(r)} fields, expected {width}")
    try:
        data = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc})") from None
    return SeriesMatrix(data)


def write_series_csv(path, x, header: bool = True):
    x = SeriesMatrix.coerce(x)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow([f"x{j + 1}" for j in range(x.dim)])
        for row in x.data:
            w.writerow([repr(float(v)) for v in row])


# -- config ------------------------------------------------------------------

def parse_kv(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        out[key] = val
    return out


def read_kv(path) -> dict[str, str]:
    return parse_kv(Path(path).read_text(encoding="utf-8"))


def _split(val: str) -> list[str]:
    return [v.strip() for v in val.split(",") if v.strip()]


def designs_from_kv(kv: dict[str, str]) -> list[DesignSpec]:
    lists = {k: [cast(v) for v in _split(kv[k])] for k, cast in _DESIGN_KEYS.items() if k in kv}
    fracs = [float(v) for v in _split(kv["tau0_frac"])] if "tau0_frac" in kv else None
    for need in ("t_len", "dim"):
        if need not in lists:
            raise ValueError(f"config is missing required key {need!r}")
    if "tau0" not in lists and fracs is None:
        raise ValueError("config needs tau0 or tau0_frac")
    keys = [k for k in lists if k != "tau0"]
    designs = []
    for combo in itertools.product(*(lists[k] for k in keys)):
        base = dict(zip(keys, combo))
        taus = lists.get("tau0") or [int(math.floor(f * base["t_len"])) for f in fracs]
        for tau0 in taus:
            designs.append(DesignSpec(tau0=tau0, **base))
    return designs


def experiment_from_kv(kv: dict[str, str]) -> ExperimentConfig:
    kwargs = {k: cast(kv[k]) for k, cast in _EXPERIMENT_KEYS.items() if k in kv}
    if "regimes" in kv:
        kwargs["regimes"] = tuple(r.lower() for r in _split(kv["regimes"]))
    known = set(_DESIGN_KEYS) | set(_EXPERIMENT_KEYS) | {"regimes", "tau0_frac", "experiments", "scales",
                                                          "init_grid"}
    unknown = sorted(set(kv) - known)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    return ExperimentConfig(designs=designs_from_kv(kv), **kwargs)


def design_from_kv(kv: dict[str, str]) -> DesignSpec:
    designs = designs_from_kv(kv)
    if len(designs) != 1:
        raise ValueError(f"expected a single design, config expands to {len(designs)}")
    return designs[0]


# -- outputs -----------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def write_csv(path: Path, columns: list[str], records: list[dict]):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for rec in records:
            w.writerow([_fmt(rec.get(c)) for c in columns])


def _write_json(path: Path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def write_estimation_outputs(out_dir: Path, rows: list[dict], metrics: list[MetricRow]):
    recs = metrics_to_records(metrics)
    stable = [{k: v for k, v in r.items() if k != "mean_time_s"} for r in recs]
    write_csv(out_dir / "metrics.csv", ESTIMATION_METRIC_COLUMNS, stable)
    _write_json(out_dir / "metrics.json", stable)
    write_csv(out_dir / "replications.csv", ESTIMATION_REP_COLUMNS, rows)
    write_csv(out_dir / "timing.csv", ["design", "method", "mean_time_s"], recs)


def write_inference_outputs(out_dir: Path, rows: list[dict], metrics: list[MetricRow]):
    recs = metrics_to_records(metrics)
    write_csv(out_dir / "metrics.csv", INFERENCE_METRIC_COLUMNS, recs)
    _write_json(out_dir / "metrics.json", recs)
    write_csv(out_dir / "replications.csv", INFERENCE_REP_COLUMNS, rows)


def write_initializer_outputs(out_dir: Path, spec: DesignSpec, pairs: list[tuple[int, int]]):
    write_csv(out_dir / "initializer.csv", ["init_tau", "step1_tau", "tau0"],
              [{"init_tau": a, "step1_tau": b, "tau0": spec.tau0} for a, b in pairs])


def fit_result_json(fit, jump=None, var=None, intervals=(), boundary=None) -> dict:
    out = {
        "tau_hat": fit.step2_tau,
        "step1_tau": fit.step1_tau,
        "init_tau": fit.init_tau,
        "xi_hat": None if jump is None else jump.xi,
        "sigma_inf_sq_hat": None if var is None else var.sigma_inf_sq_hat,
        "support_union": [] if jump is None else [int(j) for j in jump.support_union],
        "intervals": [
            {"regime": ci.regime.kind.value, "alpha": ci.alpha, "quantile": ci.quantile, "margin": ci.margin,
             "lo": ci.lo, "hi": ci.hi}
            for ci in intervals
        ],
        "elapsed_seconds": fit.elapsed_seconds,
    }
    if boundary is not None:
        out["boundary"] = {"gamma": boundary.gamma, "q_at_T": boundary.q_at_T, "q_at_hat": boundary.q_at_hat,
                           "selected_tau": boundary.selected_tau}
    return out
