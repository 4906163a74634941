"""Synthetic single-change panels with Toeplitz-correlated noise."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._rng import substream
from .model import SeriesMatrix


class NoiseFamily(str, enum.Enum):
    GAUSSIAN = "gaussian"
    LAPLACE = "laplace"


class MeanProfile(str, enum.Enum):
    GRADED = "graded"  # active values 1 down to 0.25
    FLAT = "flat"  # every active value 1


class FactorizationError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class DesignSpec:
    t_len: int
    dim: int
    tau0: int
    s: int = 5
    scale_c: float = 1.0
    rho: float = 0.5
    family: NoiseFamily = NoiseFamily.GAUSSIAN
    seed: int = 0
    noise_scale: float = 1.0  # 0 gives a noiseless debug series
    mean_profile: MeanProfile = MeanProfile.GRADED

    def __post_init__(self):
        object.__setattr__(self, "family", NoiseFamily(self.family))
        object.__setattr__(self, "mean_profile", MeanProfile(self.mean_profile))
        if not 1 <= self.tau0 <= self.t_len - 1:
            raise ValueError(f"tau0 must be in [1, T-1], got {self.tau0} with T={self.t_len}")
        if 2 * self.s > self.dim:
            raise ValueError(f"design needs 2s <= p, got s={self.s}, p={self.dim}")


@dataclass(frozen=True)
class CovFactor:
    sigma: np.ndarray
    factor: np.ndarray


def standard_means(p: int, s: int = 5, scale_c: float = 1.0,
                   profile: MeanProfile | str = MeanProfile.GRADED) -> tuple[np.ndarray, np.ndarray]:
    """Means with ``s`` active coordinates each, on disjoint blocks.

    With the graded profile the active values run linearly from 1 down to
    0.25 (endpoints included), so ``s=5`` gives 1, 0.8125, 0.625, 0.4375,
    0.25. The flat profile sets them all to 1.
    """
    if 2 * s > p:
        raise ValueError(f"need 2s <= p, got s={s}, p={p}")
    if MeanProfile(profile) is MeanProfile.FLAT or s == 1:
        block = np.ones(s)
    else:
        block = np.linspace(1.0, 0.25, s)
    theta1 = np.zeros(p)
    theta2 = np.zeros(p)
    theta1[:s] = scale_c * block
    theta2[s : 2 * s] = scale_c * block
    return theta1, theta2


@lru_cache(maxsize=16)
def _toeplitz_cached(p: int, rho: float) -> CovFactor:
    sigma = rho ** np.abs(np.subtract.outer(np.arange(p), np.arange(p))).astype(float)
    try:
        factor = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"Toeplitz matrix with rho={rho}, p={p} is not positive definite") from exc
    sigma.setflags(write=False)
    factor.setflags(write=False)
    return CovFactor(sigma=sigma, factor=factor)


def toeplitz_factor(p: int, rho: float) -> CovFactor:
    """``Sigma_ij = rho^|i-j|`` and its lower Cholesky factor."""
    if not -1 < rho < 1:
        raise ValueError(f"need |rho| < 1, got {rho}")
    if p < 1:
        raise ValueError(f"need p >= 1, got {p}")
    return _toeplitz_cached(int(p), float(rho))


def gen_noise(t_len: int, factor: CovFactor, family: NoiseFamily | str, rng) -> np.ndarray:
    """``T x p`` noise with rows ``L @ e_t``; ``e_t`` has i.i.d. unit-variance entries.

    ``rng`` is a ``numpy`` Generator or an integer seed.
    """
    family = NoiseFamily(family)
    if not isinstance(rng, np.random.Generator):
        rng = substream(rng)
    p = factor.factor.shape[0]
    if family is NoiseFamily.GAUSSIAN:
        raw = rng.standard_normal((t_len, p))
    else:
        raw = rng.laplace(0.0, 1.0 / np.sqrt(2.0), (t_len, p))
    return raw @ factor.factor.T


@dataclass(frozen=True)
class GeneratedSeries:
    series: SeriesMatrix
    theta1: np.ndarray
    theta2: np.ndarray
    eta: np.ndarray
    xi: float
    tau0: int


def gen_series(spec: DesignSpec, rng=None) -> GeneratedSeries:
    """Draw one panel; deterministic in ``spec.seed`` unless a generator is passed."""
    theta1, theta2 = standard_means(spec.dim, spec.s, spec.scale_c, spec.mean_profile)
    if rng is None:
        rng = substream(spec.seed)
    noise = gen_noise(spec.t_len, toeplitz_factor(spec.dim, spec.rho), spec.family, rng)
    means = np.where((np.arange(spec.t_len) < spec.tau0)[:, None], theta1, theta2)
    x = means + spec.noise_scale * noise
    eta = theta1 - theta2
    return GeneratedSeries(SeriesMatrix(x), theta1, theta2, eta, float(np.linalg.norm(eta)), spec.tau0)
