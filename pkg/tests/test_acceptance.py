"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""

import time

import numpy as np
import pytest
from scipy import stats

from hdchange.changepoint import algorithm1, plugin_argmin, update_step
from hdchange.datagen import DesignSpec, gen_series
from hdchange.harness import ExperimentConfig, run_estimation_experiment, run_inference_experiment
from hdchange.limitdist import (
    Regime,
    RwConfig,
    _brownian_sample,
    quantile_vanishing,
    quantile_vanishing_mc,
    simulate_rw_argmax,
)
from hdchange.mean_estimation import soft_threshold

_OUTPUTS = {}


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {n:>2}] {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return emit


def _brute_argmin(x, t1, t2):
    T = x.shape[0]
    q = [np.sum((x[:tau] - t1) ** 2) + np.sum((x[tau:] - t2) ** 2) for tau in range(1, T)]
    return 1 + int(np.argmin(q))


def test_criterion_01_argmin_oracle(report):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(200):
        T, p = int(rng.integers(3, 61)), int(rng.integers(1, 9))
        x = rng.normal(size=(T, p))
        x[int(rng.integers(1, T)):] += rng.normal(size=p)
        t1, t2 = rng.normal(size=p), rng.normal(size=p)
        mismatches += plugin_argmin(x, t1, t2) != _brute_argmin(x, t1, t2)
    elapsed = time.perf_counter() - start
    ok = report(1, mismatches == 0 and elapsed < 5, f"mismatches={mismatches}/200 time={elapsed:.2f}s")
    assert ok


def test_criterion_02_soft_threshold_oracle(report):
    rng = np.random.default_rng(7)
    grid = np.linspace(-3, 3, 60_001)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(500):
        v, lam = rng.uniform(-2.5, 2.5), rng.uniform(0, 1)
        ref = grid[np.argmin((v - grid) ** 2 + 2 * lam * np.abs(grid))]
        worst = max(worst, abs(soft_threshold([v], lam)[0] - ref))
    elapsed = time.perf_counter() - start
    ok = report(2, worst <= 1e-4 + 1e-12 and elapsed < 5, f"max deviation={worst:.2e} time={elapsed:.2f}s")
    assert ok


def test_criterion_03_vanishing_quantile(report):
    _brownian_sample.cache_clear()
    start = time.perf_counter()
    mc = quantile_vanishing_mc(0.05, paths=200_000, step=0.01)
    elapsed = time.perf_counter() - start
    pinned = quantile_vanishing(0.05)
    ok = pinned == 11.03 and abs(mc - 11.03) <= 0.3 and elapsed < 60
    assert report(3, ok, f"pinned={pinned} mc={mc:.3f} (2e5 paths, step 0.01) time={elapsed:.1f}s")


def test_criterion_04_random_walk_law(report):
    start = time.perf_counter()
    draws = simulate_rw_argmax(Regime("nv", 1.0, 1.0), RwConfig(replications=100_000, seed=1))
    ks = stats.ks_2samp(draws, -draws).statistic
    sharp = simulate_rw_argmax(Regime("nv", 0.01, 10.0), RwConfig(replications=100_000, seed=2))
    at_zero = float(np.mean(sharp == 0))
    elapsed = time.perf_counter() - start
    ok = ks < 0.03 and at_zero >= 0.99 and elapsed < 30
    assert report(4, ok, f"KS={ks:.4f} P(argmax=0)={at_zero:.4f} time={elapsed:.1f}s")


# criteria 5 to 8 write their outputs so criterion 12 can compare bytes


def _cfg5(workers=1):
    return ExperimentConfig([DesignSpec(425, 250, 170)], replications_est=100, workers=workers)


def _cfg6(workers=1):
    return ExperimentConfig([DesignSpec(425, 750, 85, family="laplace")], replications_est=100, workers=workers)


def _cfg7(workers=1):
    return ExperimentConfig([DesignSpec(425, 50, 85)], replications_inf=500, workers=workers)


def _cfg8(workers=1):
    designs = [DesignSpec(425, 250, 170, scale_c=c) for c in (1.0, 1.5, 2.0, 0.25)]
    return ExperimentConfig(designs, replications_inf=500, workers=workers)


RUNS = {5: (_cfg5, run_estimation_experiment), 6: (_cfg6, run_estimation_experiment),
        7: (_cfg7, run_inference_experiment), 8: (_cfg8, run_inference_experiment)}


def _run(n, out_dir, workers=1):
    cfg_fn, runner = RUNS[n]
    start = time.perf_counter()
    metrics = runner(cfg_fn(workers), out_dir / f"criterion{n}")
    return metrics, time.perf_counter() - start


@pytest.fixture(scope="module")
def out_root(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


def _single(n, out_root):
    if n not in _OUTPUTS:
        _OUTPUTS[n] = _run(n, out_root / "w1")
    return _OUTPUTS[n]


def test_criterion_05_gaussian_estimation(report, out_root):
    metrics, elapsed = _single(5, out_root)
    al1 = next(m for m in metrics if m.method == "AL1")
    ok = al1.bias <= 0.6 and 1.1 <= al1.rmse <= 3.4 and elapsed < 600
    assert report(5, ok, f"AL1 bias={al1.bias:.3f} rmse={al1.rmse:.3f} time={elapsed:.1f}s")


def test_criterion_06_laplace_estimation(report, out_root):
    metrics, elapsed = _single(6, out_root)
    al1 = next(m for m in metrics if m.method == "AL1")
    ok = al1.bias <= 0.7 and 0.9 <= al1.rmse <= 2.8 and elapsed < 900
    assert report(6, ok, f"AL1 bias={al1.bias:.3f} rmse={al1.rmse:.3f} time={elapsed:.1f}s")


def test_criterion_07_inference_table(report, out_root):
    metrics, elapsed = _single(7, out_root)
    v = next(m for m in metrics if m.method == "V")
    nv = next(m for m in metrics if m.method == "NV")
    ok = (0.91 <= nv.coverage <= 0.99 and 3.2 <= nv.avg_margin <= 4.7 and 0.90 <= v.coverage <= 0.99
          and nv.degenerate == v.degenerate == 0 and elapsed < 1800)
    detail = (f"NV coverage={nv.coverage:.3f} margin={nv.avg_margin:.3f}; V coverage={v.coverage:.3f} "
              f"margin={v.avg_margin:.3f}; degenerate={v.degenerate} time={elapsed:.1f}s")
    assert report(7, ok, detail)


def test_criterion_08_scaling_sweep(report, out_root):
    metrics, elapsed = _single(8, out_root)
    cov = {(m.spec.scale_c, m.method): m.coverage for m in metrics}
    # the vanishing-regime interval is the asserted one; NV is shown for reference
    ok = all(cov[(c, "V")] >= 0.90 for c in (1.0, 1.5, 2.0)) and cov[(0.25, "V")] < 0.90
    detail = "V " + " ".join(f"c={c}:{cov[(c, 'V')]:.3f}" for c in (1.0, 1.5, 2.0, 0.25))
    detail += " | NV " + " ".join(f"c={c}:{cov[(c, 'NV')]:.3f}" for c in (1.0, 1.5, 2.0, 0.25))
    assert report(8, ok, f"{detail} time={elapsed:.1f}s")


def test_criterion_09_perfect_recovery(report):
    hits = {}
    for tau0 in (40, 80):
        hits[tau0] = sum(
            algorithm1(gen_series(DesignSpec(200, 100, tau0, scale_c=10.0, seed=r)).series).step2_tau == tau0
            for r in range(100))
    ok = all(h >= 95 for h in hits.values())
    assert report(9, ok, " ".join(f"tau0={k}: {v}/100 exact" for k, v in hits.items()))


def test_criterion_10_initializer_robustness(report):
    T = 225
    spec = DesignSpec(T, 100, T // 2, mean_profile="flat", seed=0)
    x = gen_series(spec).series
    lo, hi = int(np.ceil(1 + 0.1 * (T - 2))), int(np.floor(T - 1 - 0.1 * (T - 2)))
    taus = [update_step(x, i)[0] for i in range(lo, hi + 1)]
    values, counts = np.unique(taus, return_counts=True)
    ok = values.size == 1
    detail = (f"initializers {lo}..{hi}: distinct step-1 estimates {values.tolist()} "
              f"(modal share {counts.max() / len(taus):.2f}, tau0={spec.tau0})")
    assert report(10, ok, detail)


def test_criterion_11_fit_time(report):
    x = gen_series(DesignSpec(425, 750, 85, seed=3)).series
    start = time.perf_counter()
    fit = algorithm1(x)
    wall = time.perf_counter() - start
    ok = wall < 5
    assert report(11, ok, f"AL1 fit T=425 p=750: wall={wall:.3f}s (internal {fit.elapsed_seconds:.3f}s)")


def test_criterion_12_determinism(report, out_root):
    files = ("metrics.csv", "metrics.json", "replications.csv")
    diffs = []
    for n in RUNS:
        _single(n, out_root)
        _run(n, out_root / "w2", workers=2)
        for f in files:
            a = (out_root / "w1" / f"criterion{n}" / f).read_bytes()
            b = (out_root / "w2" / f"criterion{n}" / f).read_bytes()
            if a != b:
                diffs.append(f"criterion{n}/{f}")
    ok = not diffs
    detail = "byte-identical across 1 and 2 workers" if ok else f"differs: {', '.join(diffs)}"
    assert report(12, ok, f"{detail} ({len(RUNS) * len(files)} files)")
