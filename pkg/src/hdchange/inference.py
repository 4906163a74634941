"""Jump and asymptotic-variance estimates, and confidence intervals for the change point."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .changepoint import ChangePointFit
from .limitdist import (
    IncrementLaw,
    Regime,
    RegimeKind,
    RwConfig,
    _check_alpha,
    quantile_nonvanishing,
    quantile_vanishing,
)
from .mean_estimation import MeanPair, refit_means
from .model import JumpSummary, SeriesMatrix


class DegenerateJumpError(ValueError):
    """Estimated jump is zero, so no interval can be formed."""


@dataclass(frozen=True)
class VarianceEstimate:
    sigma_inf_sq_hat: float
    xi_hat: float
    projected_means: tuple[float, float]


@dataclass(frozen=True)
class IntervalResult:
    tau_hat: int
    regime: Regime
    alpha: float
    quantile: float
    margin: float
    lo: int
    hi: int

    def covers(self, tau: int) -> bool:
        return self.lo <= tau <= self.hi


def estimate_jump(x, tau_hat: int, support1, support2) -> tuple[JumpSummary, MeanPair]:
    """Jump vector from support-restricted refitted means at ``tau_hat``."""
    refit = refit_means(x, tau_hat, support1, support2)
    union = np.union1d(np.asarray(support1, dtype=int), np.asarray(support2, dtype=int))
    return JumpSummary.from_eta(refit.theta1 - refit.theta2, union), refit


def estimate_sigma_inf(x, tau_hat: int, jump: JumpSummary, refit: MeanPair) -> VarianceEstimate:
    """Residual variance of the series projected onto the estimated jump direction.

    Uses divisor ``T``. Avoids estimating the full covariance matrix.
    """
    x = SeriesMatrix.coerce(x)
    if not jump.xi > 0:
        raise DegenerateJumpError("estimated jump is zero; projection direction undefined")
    direction = jump.eta / jump.xi
    z = x.data @ direction
    mu1 = float(refit.theta1 @ direction)
    mu2 = float(refit.theta2 @ direction)
    resid = np.concatenate([z[:tau_hat] - mu1, z[tau_hat:] - mu2])
    return VarianceEstimate(
        sigma_inf_sq_hat=float(resid @ resid) / x.t_len,
        xi_hat=jump.xi,
        projected_means=(mu1, mu2),
    )


def interval_from_margin(tau_hat: int, margin: float, t_len: int) -> tuple[int, int]:
    r = int(math.ceil(margin - 1e-12)) if margin > 0 else 0
    return max(1, tau_hat - r), min(t_len - 1, tau_hat + r)


def confidence_interval(
    x,
    fit: ChangePointFit,
    regime_kind: RegimeKind | str = RegimeKind.NONVANISHING,
    alpha: float = 0.05,
    law: IncrementLaw | str = IncrementLaw.GAUSSIAN,
    config: RwConfig | None = None,
    estimates: tuple[JumpSummary, VarianceEstimate] | None = None,
) -> IntervalResult:
    """Interval ``tau_hat -/+ ceil(margin)`` clipped to ``[1, T-1]``.

    Vanishing regime: ``margin = q_v(alpha) * sigma^2 / xi^2``.
    Non-vanishing regime: ``margin`` is the random-walk quantile simulated
    with the plug-in ``xi`` and ``sigma^2``.

    ``estimates`` skips re-estimating the jump when several intervals share a fit.
    """
    alpha = _check_alpha(alpha)
    kind = RegimeKind(regime_kind)
    x = SeriesMatrix.coerce(x)
    tau = fit.step2_tau
    if estimates is None:
        jump, var = plugin_estimates(x, fit)
    else:
        jump, var = estimates
    if not jump.xi > 0:
        raise DegenerateJumpError("estimated jump is zero; interval undefined")
    sigma2 = var.sigma_inf_sq_hat

    if kind is RegimeKind.VANISHING:
        q = quantile_vanishing(alpha)
        margin = q * sigma2 / jump.xi ** 2
        regime = Regime(kind, max(sigma2, np.finfo(float).tiny), None, law)
    else:
        if sigma2 > 0:
            regime = Regime(kind, sigma2, jump.xi, law)
            q = quantile_nonvanishing(regime, alpha, config)
        else:
            # zero noise: the walk decreases deterministically, argmax is 0
            regime = Regime(kind, np.finfo(float).tiny, jump.xi, law)
            q = 0.0
        margin = q
    lo, hi = interval_from_margin(tau, margin, x.t_len)
    return IntervalResult(tau_hat=tau, regime=regime, alpha=alpha, quantile=q, margin=margin, lo=lo, hi=hi)


def plugin_estimates(x, fit: ChangePointFit) -> tuple[JumpSummary, VarianceEstimate]:
    x = SeriesMatrix.coerce(x)
    jump, refit = estimate_jump(x, fit.step2_tau, fit.step2_means.support1, fit.step2_means.support2)
    return jump, estimate_sigma_inf(x, fit.step2_tau, jump, refit)
