"""Betting-martingale confidence intervals for the mean of bounded data.

Candidate means live on a uniform grid over the normalized range [0, 1]
(endpoints included). For each candidate ``m`` two capital processes are
run, one betting that the mean exceeds ``m`` and one that it falls below.
A candidate is rejected once half the larger capital reaches ``1/alpha``.

The upward-bet capital is non-increasing in ``m`` and the downward-bet
capital non-decreasing, at every time step, so the rejected candidates
form a down-set and an up-set of the grid. The surviving set is therefore
a contiguous run of grid points and its two edges can be located by
bisection. This keeps the cost at ``O(n log G)`` and makes very fine grids
affordable for the wide ranges produced by the uniform PPI transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import ConfidenceInterval, Method, check_alpha
from .exceptions import ConfigError, DataError, EmptyCandidateSetError

__all__ = ["WsrConfig", "wsr_interval", "betting_rates", "auto_grid_size"]

#: default grid resolution in the units of the data
DEFAULT_RESOLUTION = 1e-3


def auto_grid_size(lower, upper, resolution=DEFAULT_RESOLUTION):
    """Grid size whose cells are at most ``resolution`` wide in data units."""
    return max(1001, int(math.ceil((upper - lower) / resolution - 1e-9)) + 1)


@dataclass(frozen=True)
class WsrConfig:
    """Settings for :func:`wsr_interval`.

    Parameters
    ----------
    grid_size : int or None
        Number of candidate means, spread evenly over the normalized range
        with both endpoints included. ``None`` picks the smallest size giving
        cells no wider than 1e-3 in data units (1001 for a [0, 1] range).
    c : float
        Cap on the bet as a fraction of the largest bet that keeps the capital
        positive.
    lower, upper : float
        A-priori bounds on every sample.
    """

    grid_size: Optional[int] = None
    c: float = 0.99
    lower: float = 0.0
    upper: float = 1.0

    def __post_init__(self):
        if self.grid_size is not None and int(self.grid_size) < 2:
            raise ConfigError(f"grid_size must be at least 2, got {self.grid_size}")
        if not 0.0 < self.c < 1.0:
            raise ConfigError(f"c must lie in (0, 1), got {self.c}")
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)) or not self.lower < self.upper:
            raise ConfigError(f"need lower < upper, got [{self.lower}, {self.upper}]")

    @property
    def resolved_grid_size(self):
        if self.grid_size is not None:
            return int(self.grid_size)
        return auto_grid_size(self.lower, self.upper)

    def with_range(self, lower, upper):
        return WsrConfig(self.grid_size, self.c, float(lower), float(upper))


def betting_rates(z, alpha):
    """Predictable bet sizes for normalized samples ``z``.

    Uses the regularized running mean and variance (prior 0.5 and 0.25) and
    the variance estimate from the previous step.
    """
    n = z.size
    t = np.arange(1, n + 1, dtype=float)
    csum = np.cumsum(z)
    csq = np.cumsum(z * z)
    mu = (0.5 + csum) / (t + 1)
    # sum_j (z_j - mu_t)^2 expanded with running sums
    ss = np.maximum(csq - 2.0 * mu * csum + t * mu * mu, 0.0)
    var = (0.25 + ss) / (t + 1)
    var_prev = np.concatenate(([0.25], var[:-1]))
    return np.sqrt(2.0 * math.log(2.0 / alpha) / (n * var_prev))


def _max_log_capital(z, lam, m, c, upward):
    diff = z - m
    if upward:
        cap = c / m if m > 0.0 else math.inf
        factors = np.minimum(lam, cap) * diff
    else:
        cap = c / (1.0 - m) if m < 1.0 else math.inf
        factors = -np.minimum(lam, cap) * diff
    return float(np.max(np.cumsum(np.log1p(factors))))


def _surviving_range(z, alpha, grid_size, c):
    """Index range [lo, hi] of grid points that are never rejected."""
    lam = betting_rates(z, alpha)
    # rejected when 0.5 * capital >= 1/alpha
    threshold = math.log(2.0 / alpha)
    last = grid_size - 1

    def rejected_up(i):
        return _max_log_capital(z, lam, i / last, c, True) >= threshold

    def rejected_down(i):
        return _max_log_capital(z, lam, i / last, c, False) >= threshold

    # largest index rejected by the upward bet (a down-set), or -1
    if not rejected_up(0):
        lo = 0
    elif rejected_up(last):
        lo = grid_size
    else:
        a, b = 0, last  # rejected_up(a) and not rejected_up(b)
        while b - a > 1:
            mid = (a + b) // 2
            if rejected_up(mid):
                a = mid
            else:
                b = mid
        lo = b
    # smallest index rejected by the downward bet (an up-set), or grid_size
    if not rejected_down(last):
        hi = last
    elif rejected_down(0):
        hi = -1
    else:
        a, b = 0, last  # not rejected_down(a) and rejected_down(b)
        while b - a > 1:
            mid = (a + b) // 2
            if rejected_down(mid):
                b = mid
            else:
                a = mid
        hi = a
    return lo, hi


def wsr_interval(samples, alpha, config=None, *, truncate=True, method=Method.CLASSICAL):
    """Finite-sample confidence interval for the mean of bounded samples.

    Parameters
    ----------
    samples : array-like of shape (n,)
        Observations, each inside ``[config.lower, config.upper]``. Their
        order matters: the bets are predictable in this order.
    alpha : float
        Miscoverage level in (0, 1).
    config : WsrConfig, optional
    truncate : bool
        Clip the result to [0, 1]. Callers composing several intervals pass
        ``False`` and clip the final interval themselves.
    method : Method
        Tag stored on the returned interval.

    Returns
    -------
    ConfidenceInterval

    Raises
    ------
    DataError
        Empty input or a sample outside the declared range.
    EmptyCandidateSetError
        Every grid point was rejected.
    """
    alpha = check_alpha(alpha)
    config = config or WsrConfig()
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size == 0:
        raise DataError("need at least one sample")
    if not np.all(np.isfinite(x)):
        raise DataError("samples contain non-finite values")
    lo_b, hi_b = config.lower, config.upper
    span = hi_b - lo_b
    # tolerate representation error from callers' affine transforms
    slack = 1e-12 * max(1.0, abs(lo_b), abs(hi_b))
    if x.min() < lo_b - slack or x.max() > hi_b + slack:
        raise DataError(
            f"samples must lie in [{lo_b}, {hi_b}], got range [{x.min()}, {x.max()}]"
        )
    z = np.clip((x - lo_b) / span, 0.0, 1.0)
    grid_size = config.resolved_grid_size
    lo, hi = _surviving_range(z, alpha, grid_size, config.c)
    if lo > hi:
        raise EmptyCandidateSetError(
            "every candidate mean was rejected; the data are inconsistent with the stated bounds"
        )
    last = grid_size - 1
    raw_lower = lo / last * span + lo_b
    raw_upper = hi / last * span + lo_b
    estimate = float(x.mean())
    if truncate:
        return ConfidenceInterval.clipped(raw_lower, raw_upper, alpha, method, estimate)
    return ConfidenceInterval(
        lower=raw_lower,
        upper=raw_upper,
        alpha=alpha,
        method=Method(method),
        estimate=estimate,
    )
