"""Quantiles of the two limiting laws of the change point estimator.

Vanishing jump: ``xi^2 / sigma^2 * (tau_hat - tau0)`` tends to the argmax of
``2 W(z) - |z|`` with ``W`` a two-sided Brownian motion. Its 97.5% point is
the classical 11.03; other levels come from a discretised path simulation.

Non-vanishing jump: ``tau_hat - tau0`` tends to the argmax over the integers
of a two-sided random walk started at 0 whose increments have mean
``-xi^2`` and variance ``4 xi^2 sigma^2``.

Both laws are symmetric about 0, so a symmetric interval radius at level
``1 - alpha`` is the ``1 - alpha`` quantile of ``|argmax|`` (equivalently the
``1 - alpha/2`` quantile of the signed argmax).

Simulation
----------
Each side of the walk is extended in blocks: an initial horizon, then
doubling (integer walk) or fixed-length blocks (fine Brownian grid, where
doubling would overshoot by thousands of steps). A path stops once its running maximum sits in the first half of
the simulated horizon and the current value is more than a safety margin
below that maximum. The margin is the larger of ``margin_sd`` step standard
deviations and the Lundberg bound ``log(1/tail_tol) / r``, where ``r`` is
the adjustment coefficient of the increment law; past that point the chance
of a later, higher maximum is below ``tail_tol``.

Increments for block ``b`` and row chunk ``c`` come from their own seeded
substream, so a path's increments do not depend on how long other paths
run. A run truncated at a fixed horizon therefore sees exactly the same
increments as the adaptive run. The Brownian grid instead packs the
still-active paths before drawing; it stays deterministic in the seed but
gives up that truncation property.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from ._rng import substream


class RegimeKind(str, enum.Enum):
    VANISHING = "v"
    NONVANISHING = "nv"


class IncrementLaw(str, enum.Enum):
    GAUSSIAN = "gaussian"
    LAPLACE = "laplace"


@dataclass(frozen=True)
class Regime:
    kind: RegimeKind
    sigma_inf_sq: float
    xi_inf: float | None = None
    law: IncrementLaw = IncrementLaw.GAUSSIAN

    def __post_init__(self):
        object.__setattr__(self, "kind", RegimeKind(self.kind))
        object.__setattr__(self, "law", IncrementLaw(self.law))
        if not self.sigma_inf_sq > 0:
            raise ValueError(f"sigma_inf_sq must be positive, got {self.sigma_inf_sq}")
        if self.kind is RegimeKind.NONVANISHING and not (self.xi_inf is not None and self.xi_inf > 0):
            raise ValueError(f"xi_inf must be positive in the non-vanishing regime, got {self.xi_inf}")

    @property
    def step_mean(self) -> float:
        return -self.xi_inf ** 2

    @property
    def step_sd(self) -> float:
        return 2.0 * self.xi_inf * math.sqrt(self.sigma_inf_sq)


@dataclass(frozen=True)
class RwConfig:
    replications: int = 3000
    seed: int = 0
    initial_horizon: int = 64
    margin_sd: float = 10.0
    tail_tol: float = 1e-9
    max_horizon: int = 1 << 24
    extend_by: int | None = None  # fixed block length after the first; None doubles
    cell_budget: int = 1 << 23  # max floats drawn per chunk

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.initial_horizon < 2:
            raise ValueError("initial_horizon must be >= 2")


VANISHING_PINNED = {0.05: 11.03}


def _check_alpha(alpha: float) -> float:
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    return float(alpha)


def lundberg_exponent(law: IncrementLaw, mean: float, sd: float) -> float:
    """Positive root ``r`` of ``E exp(r Z) = 1`` for increments with negative mean."""
    if not mean < 0:
        raise ValueError("adjustment coefficient needs a negative drift")
    mu = -mean
    if law is IncrementLaw.GAUSSIAN:
        return 2.0 * mu / sd ** 2
    b = sd / math.sqrt(2.0)
    f = lambda r: math.exp(-r * mu) - 1.0 + (b * r) ** 2  # noqa: E731
    lo = 0.5 * mu / (b * b + 0.5 * mu * mu)
    return brentq(f, lo, 1.0 / b)


def _draw(rng: np.random.Generator, law: IncrementLaw, mean: float, sd: float, shape) -> np.ndarray:
    if law is IncrementLaw.GAUSSIAN:
        return mean + sd * rng.standard_normal(shape)
    return rng.laplace(mean, sd / math.sqrt(2.0), shape)


def _block_size(b: int, cfg: RwConfig) -> int:
    if b == 0:
        return cfg.initial_horizon
    if cfg.extend_by is not None:
        return cfg.extend_by
    return cfg.initial_horizon << (b - 1)


def _one_side(n, law, mean, sd, seed, side, cfg: RwConfig, horizon=None, compact=False):
    """Running max (including the origin) and its position for ``n`` one-sided walks."""
    level = np.zeros(n)
    best = np.zeros(n)
    where = np.zeros(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    margin = max(cfg.margin_sd * sd, math.log(1.0 / cfg.tail_tol) / lundberg_exponent(law, mean, sd))
    h = 0
    b = 0
    while True:
        size = _block_size(b, cfg)
        use = size if horizon is None else min(size, horizon - h)
        chunk = max(1, cfg.cell_budget // size)
        rows_all = np.flatnonzero(active)
        if compact:
            pieces = [(c, rows_all[c * chunk : (c + 1) * chunk], None) for c in range(-(-rows_all.size // chunk))]
        else:
            pieces = []
            for c in range(-(-n // chunk)):
                lo, hi = c * chunk, min(n, (c + 1) * chunk)
                sel = rows_all[(rows_all >= lo) & (rows_all < hi)]
                if sel.size:
                    pieces.append((c, sel, sel - lo))
        for c, rows, local in pieces:
            rng = substream(seed, side, b, c)
            if compact:
                z = _draw(rng, law, mean, sd, (rows.size, size))[:, :use]
            else:
                z = _draw(rng, law, mean, sd, (min(n, (c + 1) * chunk) - c * chunk, size))[local, :use]
            path = np.cumsum(z, axis=1)
            path += level[rows, None]
            j = np.argmax(path, axis=1)
            peak = path[np.arange(rows.size), j]
            up = peak > best[rows]
            best[rows[up]] = peak[up]
            where[rows[up]] = h + j[up] + 1
            level[rows] = path[:, -1]
        h += use
        if horizon is not None:
            if h >= horizon:
                break
        else:
            rows = rows_all
            done = (2 * where[rows] < h) & (level[rows] < best[rows] - margin)
            active[rows[done]] = False
            if not active.any():
                break
            if h >= cfg.max_horizon:
                raise RuntimeError(f"walk did not settle within {cfg.max_horizon} steps")
        b += 1
    return best, where


def _two_sided(n, law, mean, sd, seed, cfg, horizon=None, compact=False) -> np.ndarray:
    right_max, right_at = _one_side(n, law, mean, sd, seed, 0, cfg, horizon, compact)
    left_max, left_at = _one_side(n, law, mean, sd, seed, 1, cfg, horizon, compact)
    out = np.zeros(n, dtype=np.int64)
    right_wins = (right_max > left_max) | ((right_max == left_max) & (right_at <= left_at))
    out[right_wins] = right_at[right_wins]
    out[~right_wins] = -left_at[~right_wins]
    return out


def simulate_rw_argmax(regime: Regime, config: RwConfig | None = None, horizon: int | None = None) -> np.ndarray:
    """Integer argmax of the two-sided negative-drift walk, one per replication.

    ``horizon`` forces a fixed truncation per side instead of the adaptive rule.
    """
    config = config or RwConfig()
    if regime.kind is not RegimeKind.NONVANISHING:
        raise ValueError("random-walk argmax needs a non-vanishing regime")
    return _two_sided(config.replications, regime.law, regime.step_mean, regime.step_sd, config.seed, config, horizon)


def quantile_nonvanishing(regime: Regime, alpha: float, config: RwConfig | None = None) -> float:
    """Symmetric interval radius: the ``1 - alpha`` empirical quantile of ``|argmax|``."""
    alpha = _check_alpha(alpha)
    draws = simulate_rw_argmax(regime, config)
    return float(np.quantile(np.abs(draws), 1.0 - alpha, method="inverted_cdf"))


@lru_cache(maxsize=8)
def _brownian_sample(paths: int, step: float, seed: int, tail_tol: float) -> np.ndarray:
    block = max(2, int(round(5.0 / step)))
    cfg = RwConfig(replications=paths, seed=seed, initial_horizon=2 * block, extend_by=block,
                   margin_sd=10.0, tail_tol=tail_tol)
    steps = _two_sided(paths, IncrementLaw.GAUSSIAN, -step, 2.0 * math.sqrt(step), seed, cfg, compact=True)
    out = steps * step
    out.setflags(write=False)
    return out


def simulate_brownian_argmax(paths: int = 200_000, step: float = 0.01, seed: int = 0,
                             tail_tol: float = 1e-5) -> np.ndarray:
    """Argmax of ``2 W(z) - |z|`` on the grid ``step * Z``, one value per path.

    On the grid each side is a Gaussian walk with mean ``-step`` and variance
    ``4 * step`` per increment.
    """
    if paths < 1 or not step > 0:
        raise ValueError("need paths >= 1 and step > 0")
    return _brownian_sample(int(paths), float(step), int(seed), float(tail_tol))


def quantile_vanishing_mc(alpha: float, paths: int = 200_000, step: float = 0.01, seed: int = 0) -> float:
    alpha = _check_alpha(alpha)
    return float(np.quantile(np.abs(simulate_brownian_argmax(paths, step, seed)), 1.0 - alpha))


def quantile_vanishing(alpha: float, paths: int = 200_000, step: float = 0.01, seed: int = 0) -> float:
    """Upper ``alpha/2`` point of the Brownian argmax; 11.03 at ``alpha = 0.05``."""
    alpha = _check_alpha(alpha)
    for a, q in VANISHING_PINNED.items():
        if math.isclose(alpha, a, rel_tol=0, abs_tol=1e-12):
            return q
    return quantile_vanishing_mc(alpha, paths, step, seed)
