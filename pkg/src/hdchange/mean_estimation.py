"""Segment means, soft thresholding and BIC tuning of the threshold."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import SeriesMatrix, _check_tau


@dataclass(frozen=True)
class LambdaGrid:
    values: np.ndarray = field(default_factory=lambda: default_lambda_grid().values)

    def __post_init__(self):
        vals = np.atleast_1d(np.asarray(self.values, dtype=float))
        if vals.size == 0:
            raise ValueError("lambda grid must be nonempty")
        if np.any(vals <= 0) or np.any(np.diff(vals) <= 0):
            raise ValueError("lambda grid must be strictly increasing and positive")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def count(self) -> int:
        return int(self.values.size)


def default_lambda_grid(count: int = 25, upper: float = 0.5) -> LambdaGrid:
    """``count`` equally spaced points strictly inside ``(0, upper)``."""
    k = np.arange(1, count + 1)
    return LambdaGrid(upper * k / (count + 1))


@dataclass(frozen=True)
class MeanPair:
    theta1: np.ndarray
    theta2: np.ndarray
    lambda1: float = 0.0
    lambda2: float = 0.0

    @property
    def support1(self) -> np.ndarray:
        return np.flatnonzero(self.theta1)

    @property
    def support2(self) -> np.ndarray:
        return np.flatnonzero(self.theta2)

    @property
    def support_union(self) -> np.ndarray:
        return np.flatnonzero((self.theta1 != 0) | (self.theta2 != 0))


@dataclass(frozen=True)
class BicRecord:
    lam: float
    score: float
    support_size: int


def _check_split(x: SeriesMatrix, tau: int) -> int:
    try:
        return _check_tau(x, tau, 1, x.t_len - 1)
    except ValueError:
        raise ValueError(
            f"tau must lie in [1, T-1] = [1, {x.t_len - 1}] so both segments are nonempty, got {tau}"
        ) from None


def piecewise_means(x, tau: int) -> tuple[np.ndarray, np.ndarray]:
    x = SeriesMatrix.coerce(x)
    tau = _check_split(x, tau)
    return x.data[:tau].mean(axis=0), x.data[tau:].mean(axis=0)


def soft_threshold(v, lam: float) -> np.ndarray:
    """Componentwise ``sign(v) * max(|v| - lam, 0)``.

    This is the minimiser of ``||v - theta||^2 + 2 * lam * ||theta||_1``.
    """
    if lam < 0:
        raise ValueError(f"threshold must be nonnegative, got {lam}")
    v = np.asarray(v, dtype=float)
    out = np.sign(v) * np.maximum(np.abs(v) - lam, 0.0)
    # normalise -0.0 so supports and serialisation are clean
    out[out == 0] = 0.0
    return out


def thresholded_means(x, tau: int, lambda1: float, lambda2: float) -> MeanPair:
    m1, m2 = piecewise_means(x, tau)
    return MeanPair(soft_threshold(m1, lambda1), soft_threshold(m2, lambda2), float(lambda1), float(lambda2))


def bic_score(x, tau: int, pair: MeanPair) -> BicRecord:
    """BIC-type criterion: residual sum of squares plus ``|S| log T``.

    No ``1/T`` factor on the residual term; ``S`` is the union of the two
    estimated supports.
    """
    x = SeriesMatrix.coerce(x)
    tau = _check_split(x, tau)
    rss = float(np.sum((x.data[:tau] - pair.theta1) ** 2) + np.sum((x.data[tau:] - pair.theta2) ** 2))
    s = int(pair.support_union.size)
    return BicRecord(lam=pair.lambda1, score=rss + s * math.log(x.t_len), support_size=s)


def bic_path(x, tau: int, grid: LambdaGrid | None = None) -> list[BicRecord]:
    """BIC over a grid with ``lambda1 = lambda2``, via the within/between split.

    ``sum_t ||x_t - theta||^2 = sum_t ||x_t - xbar||^2 + n * ||xbar - theta||^2``
    so each grid point costs ``O(p)`` after one ``O(T p)`` pass.
    """
    x = SeriesMatrix.coerce(x)
    tau = _check_split(x, tau)
    grid = grid or default_lambda_grid()
    T = x.t_len
    m1, m2 = piecewise_means(x, tau)
    within = float(np.sum((x.data[:tau] - m1) ** 2) + np.sum((x.data[tau:] - m2) ** 2))
    logt = math.log(T)
    records = []
    for lam in grid.values:
        t1 = soft_threshold(m1, lam)
        t2 = soft_threshold(m2, lam)
        between = tau * float(np.sum((m1 - t1) ** 2)) + (T - tau) * float(np.sum((m2 - t2) ** 2))
        s = int(np.count_nonzero((t1 != 0) | (t2 != 0)))
        records.append(BicRecord(lam=float(lam), score=within + between + s * logt, support_size=s))
    return records


def tune_lambda(x, tau: int, grid: LambdaGrid | None = None) -> tuple[float, MeanPair]:
    """Pick the BIC-minimising common threshold; ties go to the largest value."""
    grid = grid or default_lambda_grid()
    records = bic_path(x, tau, grid)
    best = 0
    for i, rec in enumerate(records):
        if rec.score <= records[best].score:
            best = i
    lam = records[best].lam
    return lam, thresholded_means(x, tau, lam, lam)


def refit_means(x, tau: int, support1, support2) -> MeanPair:
    """Unpenalised segment means kept only on the given coordinates."""
    x = SeriesMatrix.coerce(x)
    m1, m2 = piecewise_means(x, tau)
    out = []
    for m, sup in ((m1, support1), (m2, support2)):
        idx = np.asarray(sup, dtype=int).reshape(-1)
        if idx.size and (idx.min() < 0 or idx.max() >= x.dim):
            raise ValueError(f"support index out of range for p={x.dim}")
        theta = np.zeros(x.dim)
        theta[idx] = m[idx]
        out.append(theta)
    return MeanPair(out[0], out[1], 0.0, 0.0)


def theoretical_lambda(sigma: float, t_len: int, p: int, l_t: float, u_t: float, psi: float,
                       c_u: float, c_u1: float) -> float:
    """Threshold from the uniform mean-deviation bound (diagnostic only).

    ``8 * max(sigma * sqrt(2 c_u1 log(p v T) / (c_u T l_t)), u_t * psi / (c_u l_t))``

    Every input besides ``t_len`` and ``p`` is unobservable in practice, which
    is why fitting always tunes the threshold by BIC instead.
    """
    if min(sigma, l_t, c_u, c_u1) <= 0 or u_t < 0 or psi < 0:
        raise ValueError("sigma, l_t, c_u, c_u1 must be positive; u_t, psi nonnegative")
    logpt = math.log(max(p, t_len))
    noise = sigma * math.sqrt(2.0 * c_u1 * logpt / (c_u * t_len * l_t))
    drift = u_t * psi / (c_u * l_t)
    return 8.0 * max(noise, drift)
