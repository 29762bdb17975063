"""Control-variate mean estimator with a Chebyshev interval.

Included as a comparison method: the plug-in variance is estimated from the
same small paired set, so the interval carries no finite-sample guarantee.

The estimator is

    ȳ - β̂ (f̄_paired - f̄_all),   β̂ = Ĉov(y, f) / V̂ar(f),

where ``f̄_all`` pools the paired and additional simulation scores. Its
variance for fixed β is

    σ_y²/n - 2β N σ_yf / (n(n+N)) + β² N σ_f² / (n(n+N)),

which is what gets plugged into Chebyshev's inequality.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import ConfidenceInterval, Method, check_alpha
from .exceptions import ConfigError, DataError

__all__ = ["CvEstimate", "cv_estimate", "cv_interval", "cv_split_interval"]


@dataclass(frozen=True)
class CvEstimate:
    point: float
    beta: float
    variance_estimate: float
    split_fraction: Optional[float] = None
    degenerate: bool = False


def _moments(y, f):
    var_y = float(np.var(y, ddof=1))
    # exact zero for constant input, which np.var can miss by rounding
    var_f = float(np.var(f, ddof=1)) if np.ptp(f) > 0 else 0.0
    cov = float(np.sum((y - y.mean()) * (f - f.mean())) / (y.size - 1))
    return var_y, var_f, cov


def _beta(var_f, cov):
    if var_f <= 0.0:
        warnings.warn(
            "paired simulation scores have zero variance; using beta = 0",
            RuntimeWarning,
            stacklevel=3,
        )
        return 0.0, True
    return cov / var_f, False


def _estimator_variance(var_y, var_f, cov, beta, n, cap_n):
    share = cap_n / (n * (n + cap_n))
    v = var_y / n - 2.0 * beta * cov * share + beta * beta * var_f * share
    return max(v, 0.0)


def _point(y, f, sim_f, beta):
    pooled = (f.sum() + sim_f.sum()) / (f.size + sim_f.size)
    return float(y.mean() - beta * (f.mean() - pooled))


def cv_estimate(paired, sim):
    """Point estimate, coefficient and plug-in variance from the full paired set."""
    if paired.n < 3:
        raise DataError(f"control variates need at least 3 paired samples, got {paired.n}")
    if sim.cap_n < 1:
        raise DataError("control variates need at least one additional simulation")
    var_y, var_f, cov = _moments(paired.y, paired.f)
    beta, degenerate = _beta(var_f, cov)
    return CvEstimate(
        point=_point(paired.y, paired.f, sim.f, beta),
        beta=beta,
        variance_estimate=_estimator_variance(var_y, var_f, cov, beta, paired.n, sim.cap_n),
        degenerate=degenerate,
    )


def _chebyshev(est, alpha, method):
    half = math.sqrt(est.variance_estimate / alpha)
    return ConfidenceInterval.clipped(
        est.point - half, est.point + half, alpha, method, estimate=est.point
    )


def cv_interval(paired, sim, alpha):
    """Control-variate point estimate ± sqrt(variance / alpha), clipped to [0, 1]."""
    alpha = check_alpha(alpha)
    return _chebyshev(cv_estimate(paired, sim), alpha, Method.CV_STANDARD)


def cv_split_interval(paired, sim, alpha, split_fraction=0.2, random_state=0):
    """Control variates with the coefficient and variance fitted on a held-out part.

    After a seeded shuffle, the first ``ceil(split_fraction * n)`` paired
    samples estimate the coefficient and the variance; the rest, together
    with the additional simulations, form the point estimate.
    """
    alpha = check_alpha(alpha)
    if not 0.0 < split_fraction < 1.0:
        raise ConfigError(f"split_fraction must lie in (0, 1), got {split_fraction}")
    if sim.cap_n < 1:
        raise DataError("control variates need at least one additional simulation")
    n = paired.n
    k = math.ceil(split_fraction * n)
    if k < 2 or n - k < 1:
        raise DataError(
            f"split_fraction={split_fraction} with n={n} leaves {k} fitting and {n - k} "
            "inference samples; need at least 2 and 1"
        )
    order = np.random.default_rng(random_state).permutation(n)
    fit_idx, inf_idx = order[:k], order[k:]
    var_y, var_f, cov = _moments(paired.y[fit_idx], paired.f[fit_idx])
    beta, degenerate = _beta(var_f, cov)
    n_inf = n - k
    est = CvEstimate(
        point=_point(paired.y[inf_idx], paired.f[inf_idx], sim.f, beta),
        beta=beta,
        variance_estimate=_estimator_variance(var_y, var_f, cov, beta, n_inf, sim.cap_n),
        split_fraction=split_fraction,
        degenerate=degenerate,
    )
    return _chebyshev(est, alpha, Method.CV_SPLIT)
