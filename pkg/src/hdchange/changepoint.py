"""Plug-in least-squares change point estimation.

The two-step procedure: threshold the segment means at a rough split, move
the split to the loss minimiser, then refit and move it once more. Two
updates are all that is needed; a third does not improve the rate.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .mean_estimation import LambdaGrid, MeanPair, default_lambda_grid, tune_lambda
from .model import GainProfile, SeriesMatrix, _check_tau, gain_profile, squared_loss


@dataclass(frozen=True)
class ChangePointFit:
    init_tau: int
    step1_tau: int
    step2_tau: int
    step1_means: MeanPair | None
    step2_means: MeanPair
    step1_lambda: float | None
    step2_lambda: float
    profile: GainProfile
    elapsed_seconds: float
    t_len: int

    @property
    def tau_hat(self) -> int:
        return self.step2_tau


@dataclass(frozen=True)
class BoundaryDecision:
    gamma: float
    q_at_T: float
    q_at_hat: float
    tau_hat: int
    selected_tau: int


def plugin_argmin(x, theta1, theta2, tau_range: tuple[int, int] | None = None) -> int:
    """Minimiser of ``Q(tau, theta1, theta2)`` over an inclusive range.

    Defaults to ``[1, T-1]``. Ties resolve to the smallest ``tau``.
    """
    x = SeriesMatrix.coerce(x)
    lo, hi = (1, x.t_len - 1) if tau_range is None else (int(tau_range[0]), int(tau_range[1]))
    if lo > hi:
        raise ValueError(f"empty search range [{lo}, {hi}]")
    prof = gain_profile(x, theta1, theta2, anchor=lo, tau_range=(lo, hi))
    return prof.argmax()


def _interior_profile(x: SeriesMatrix, pair: MeanPair) -> GainProfile:
    return gain_profile(x, pair.theta1, pair.theta2, anchor=0, tau_range=(0, x.t_len))


def _refine(x: SeriesMatrix, tau: int, grid: LambdaGrid) -> tuple[float, MeanPair, GainProfile, int]:
    lam, pair = tune_lambda(x, tau, grid)
    prof = _interior_profile(x, pair)
    return lam, pair, prof, prof.argmax(1, x.t_len - 1)


def update_step(x, tau: int, lambda_grid: LambdaGrid | None = None) -> tuple[int, MeanPair, float]:
    """One update: BIC-tuned thresholded means at ``tau``, then the plug-in argmin.

    Returns ``(new_tau, means, lambda)``.
    """
    x = SeriesMatrix.coerce(x)
    tau = _check_tau(x, tau, 1, x.t_len - 1)
    lam, pair, _, new_tau = _refine(x, tau, lambda_grid or default_lambda_grid())
    return new_tau, pair, lam


def _require_interior(x: SeriesMatrix):
    if x.t_len < 3:
        raise ValueError(f"need T >= 3 for a two-step fit, got T={x.t_len}")


def algorithm1(x, init_tau: int | None = None, lambda_grid: LambdaGrid | None = None) -> ChangePointFit:
    """Two-step estimate starting from ``init_tau`` (default ``floor(T/2)``).

    Step 1 tunes the threshold by BIC at the initial split and moves to the
    plug-in argmin; step 2 re-tunes at that point and moves again.
    """
    x = SeriesMatrix.coerce(x)
    _require_interior(x)
    grid = lambda_grid or default_lambda_grid()
    T = x.t_len
    init = T // 2 if init_tau is None else _check_tau(x, init_tau, 1, T - 1)

    start = time.perf_counter()
    lam1, pair1, _, tau1 = _refine(x, init, grid)
    lam2, pair2, prof2, tau2 = _refine(x, tau1, grid)
    elapsed = time.perf_counter() - start

    return ChangePointFit(
        init_tau=init,
        step1_tau=tau1,
        step2_tau=tau2,
        step1_means=pair1,
        step2_means=pair2,
        step1_lambda=lam1,
        step2_lambda=lam2,
        profile=prof2,
        elapsed_seconds=elapsed,
        t_len=T,
    )


def algorithm2(x, step1_tau: int, lambda_grid: LambdaGrid | None = None) -> ChangePointFit:
    """Only the refinement step, from a near-optimal split found elsewhere."""
    x = SeriesMatrix.coerce(x)
    _require_interior(x)
    grid = lambda_grid or default_lambda_grid()
    tau1 = _check_tau(x, step1_tau, 1, x.t_len - 1)

    start = time.perf_counter()
    lam2, pair2, prof2, tau2 = _refine(x, tau1, grid)
    elapsed = time.perf_counter() - start

    return ChangePointFit(
        init_tau=tau1,
        step1_tau=tau1,
        step2_tau=tau2,
        step1_means=None,
        step2_means=pair2,
        step1_lambda=None,
        step2_lambda=lam2,
        profile=prof2,
        elapsed_seconds=elapsed,
        t_len=x.t_len,
    )


def default_grid_count(t_len: int) -> int:
    return max(3, int(round(math.log(t_len))))


def coarse_grid_candidates(t_len: int, grid_count: int) -> np.ndarray:
    """``grid_count`` equally spaced interior splits, ``floor(k T / (m + 1))``."""
    if grid_count < 1:
        raise ValueError(f"grid_count must be >= 1, got {grid_count}")
    k = np.arange(1, int(math.ceil(grid_count)) + 1)
    cand = (k * t_len) // (len(k) + 1)
    return np.unique(np.clip(cand, 1, t_len - 1))


def coarse_grid_init(x, grid_count: int | None = None, lambda_grid: LambdaGrid | None = None) -> int:
    """Best-fitting split among a coarse grid, each scored with BIC-tuned means."""
    x = SeriesMatrix.coerce(x)
    grid = lambda_grid or default_lambda_grid()
    m = default_grid_count(x.t_len) if grid_count is None else grid_count
    best_tau, best_q = None, math.inf
    for tau in coarse_grid_candidates(x.t_len, m):
        _, pair = tune_lambda(x, int(tau), grid)
        q = squared_loss(x, int(tau), pair.theta1, pair.theta2)
        if q < best_q:
            best_tau, best_q = int(tau), q
    return best_tau


def default_boundary_gamma(t_len: int, p: int) -> float:
    return 2.0 * p * math.log(t_len) / t_len


def boundary_test(x, theta1, theta2, gamma: float | None = None) -> BoundaryDecision:
    """Allow the no-change answer ``tau = T`` when the interior fit gains less than ``gamma``."""
    x = SeriesMatrix.coerce(x)
    T = x.t_len
    if gamma is None:
        gamma = default_boundary_gamma(T, x.dim)
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    tau_hat = plugin_argmin(x, theta1, theta2)
    q_t = squared_loss(x, T, theta1, theta2)
    q_hat = squared_loss(x, tau_hat, theta1, theta2)
    selected = T if q_t - q_hat < gamma else tau_hat
    return BoundaryDecision(gamma=float(gamma), q_at_T=q_t, q_at_hat=q_hat, tau_hat=tau_hat, selected_tau=selected)
