"""Interval constructions combining paired real/simulation scores with extra simulations.

All functions take a :class:`~ppieval.core.PairedDataset` and, where needed, a
:class:`~ppieval.core.SimDataset`, and return a
:class:`~ppieval.core.ConfidenceInterval` on the mean real score.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .core import ConfidenceInterval, Method, check_alpha
from .exceptions import ConfigError, DataError, DisjointIntervalsError
from .wsr import WsrConfig, wsr_interval

__all__ = [
    "RiskSplit",
    "UniformPpiTransform",
    "build_uniform_transform",
    "classical_interval",
    "suresim_interval",
    "suresim_ub_interval",
    "two_stage_interval",
    "two_stage_ub_interval",
    "rectifier_interval",
    "optimize_risk_split",
    "heuristic_split",
    "uniform_point_estimate",
    "two_stage_point_estimate",
]

#: share of a hedged budget spent on the simulation-assisted interval
HEDGE_SHARE = 0.75
#: share of a two-stage budget spent on the rectifier
HEURISTIC_DELTA_SHARE = 0.9


@dataclass(frozen=True)
class RiskSplit:
    """Division of the miscoverage budget ``alpha`` between the two stages.

    ``delta`` goes to the rectifier interval, ``alpha - delta`` to the
    interval on the additional simulations.
    """

    delta: float
    alpha: float

    def __post_init__(self):
        check_alpha(self.alpha)
        if not 0.0 < self.delta < self.alpha:
            raise ConfigError(f"need 0 < delta < alpha, got delta={self.delta}, alpha={self.alpha}")

    @property
    def remainder(self):
        return self.alpha - self.delta


def heuristic_split(alpha):
    alpha = check_alpha(alpha)
    return RiskSplit(HEURISTIC_DELTA_SHARE * alpha, alpha)


@dataclass(frozen=True, eq=False)
class UniformPpiTransform:
    """Per-environment values whose plain mean is the uniform PPI estimate.

    Paired environments come first, in dataset order, followed by the
    simulation-only ones.
    """

    delta_values: np.ndarray
    indicators: np.ndarray
    n: int
    cap_n: int

    @property
    def inflation(self):
        return (self.n + self.cap_n) / self.n

    @property
    def indicator_count(self):
        return int(self.indicators.sum())

    @property
    def bounds(self):
        return -self.inflation, 1.0 + self.inflation

    @property
    def estimate(self):
        return float(self.delta_values.mean())


def _wsr_config(config, lower, upper):
    return (config or WsrConfig()).with_range(lower, upper)


def _require_paired(paired, minimum=1):
    if paired.n < minimum:
        raise DataError(f"need at least {minimum} paired samples, got {paired.n}")


def build_uniform_transform(paired, sim):
    """Inflate paired residuals by ``(n+N)/n`` and append the raw simulation scores."""
    _require_paired(paired)
    n, cap_n = paired.n, sim.cap_n
    scale = (n + cap_n) / n
    paired_part = paired.f + scale * (paired.y - paired.f)
    values = np.concatenate([paired_part, sim.f])
    indicators = np.concatenate([np.ones(n, dtype=bool), np.zeros(cap_n, dtype=bool)])
    return UniformPpiTransform(values, indicators, n, cap_n)


def uniform_point_estimate(paired, sim):
    return build_uniform_transform(paired, sim).estimate


def two_stage_point_estimate(paired, sim):
    return float(np.mean(paired.y - paired.f) + np.mean(sim.f))


def _order_seed(values):
    # data-derived default so the call stays a pure function of its inputs
    digest = hashlib.sha256(np.ascontiguousarray(values, dtype=float).tobytes()).digest()
    return int.from_bytes(digest[:8], "little")


def classical_interval(real_scores, alpha, config=None):
    """WSR interval on the real scores alone, over the range [0, 1]."""
    y = real_scores.y if hasattr(real_scores, "y") else np.asarray(real_scores, dtype=float)
    return wsr_interval(y, alpha, _wsr_config(config, 0.0, 1.0), method=Method.CLASSICAL)


def suresim_interval(paired, sim, alpha, config=None, random_state=None):
    """Uniform PPI interval from a single WSR call on the transformed data.

    The transformed values are visited in a random order before betting:
    paired and simulation-only values have different means whenever the
    simulator is biased, so a fixed block order would break the predictable
    betting argument. ``random_state`` fixes that order; by default it is
    derived from the data so repeated calls agree.
    """
    alpha = check_alpha(alpha)
    transform = build_uniform_transform(paired, sim)
    values = transform.delta_values
    if transform.cap_n > 0:
        seed = _order_seed(values) if random_state is None else random_state
        values = values[np.random.default_rng(seed).permutation(values.size)]
    lo_b, hi_b = transform.bounds
    ci = wsr_interval(values, alpha, _wsr_config(config, lo_b, hi_b), truncate=False)
    return ConfidenceInterval.clipped(
        ci.lower, ci.upper, alpha, Method.SURESIM, estimate=transform.estimate
    )


def rectifier_interval(paired, delta, config=None):
    """Interval on mean(y - f) over [-1, 1]; not clipped to [0, 1]."""
    _require_paired(paired)
    ci = wsr_interval(
        paired.y - paired.f,
        delta,
        _wsr_config(config, -1.0, 1.0),
        truncate=False,
        method=Method.RECTIFIER,
    )
    return ci


def _sim_interval(sim, level, config):
    return wsr_interval(sim.f, level, _wsr_config(config, 0.0, 1.0), truncate=False)


def two_stage_interval(paired, sim, alpha, split=None, config=None):
    """Minkowski sum of a rectifier interval and an additional-simulation interval.

    ``split.delta`` is spent on the rectifier and ``alpha - split.delta`` on
    the simulation interval. Defaults to ``delta = 0.9 * alpha``.
    """
    alpha = check_alpha(alpha)
    _require_paired(paired)
    if sim.cap_n < 1:
        raise DataError("the two-stage interval needs at least one additional simulation")
    split = split or heuristic_split(alpha)
    if not math.isclose(split.alpha, alpha):
        raise ConfigError(f"risk split was built for alpha={split.alpha}, not {alpha}")
    rect = rectifier_interval(paired, split.delta, config)
    fsim = _sim_interval(sim, split.remainder, config)
    return ConfidenceInterval.clipped(
        fsim.lower + rect.lower,
        fsim.upper + rect.upper,
        alpha,
        Method.TWO_STAGE,
        estimate=two_stage_point_estimate(paired, sim),
    )


def _intersect(first, second, alpha, method):
    lower = max(first.lower, second.lower)
    upper = min(first.upper, second.upper)
    if lower > upper:
        raise DisjointIntervalsError(
            f"hedge components do not overlap: [{first.lower}, {first.upper}] "
            f"and [{second.lower}, {second.upper}]"
        )
    raw_lower = max(first.raw_lower, second.raw_lower)
    raw_upper = min(first.raw_upper, second.raw_upper)
    return ConfidenceInterval(
        lower=lower,
        upper=upper,
        alpha=alpha,
        method=method,
        truncated_lower=raw_lower <= 0.0,
        truncated_upper=raw_upper >= 1.0,
        raw_lower=raw_lower,
        raw_upper=raw_upper,
        estimate=first.estimate,
    )


def suresim_ub_interval(paired, sim, alpha, config=None, random_state=None):
    """Intersection of the uniform PPI interval at 3α/4 and Classical at α/4."""
    alpha = check_alpha(alpha)
    main = suresim_interval(paired, sim, HEDGE_SHARE * alpha, config, random_state)
    hedge = classical_interval(paired.y, (1.0 - HEDGE_SHARE) * alpha, config)
    return _intersect(main, hedge, alpha, Method.SURESIM_UB)


def two_stage_ub_interval(paired, sim, alpha, config=None):
    """Intersection of the two-stage interval at 3α/4 and Classical at α/4."""
    alpha = check_alpha(alpha)
    inner = HEDGE_SHARE * alpha
    main = two_stage_interval(paired, sim, inner, heuristic_split(inner), config)
    hedge = classical_interval(paired.y, (1.0 - HEDGE_SHARE) * alpha, config)
    return _intersect(main, hedge, alpha, Method.TWO_STAGE_UB)


def optimize_risk_split(paired, sim, alpha, config=None, max_steps=40):
    """Choose ``delta`` minimizing the two-stage width on the given data.

    The composed width is approximately convex in ``delta``: the rectifier
    width shrinks and the simulation width grows as budget moves to the
    rectifier. Bisection on the sign of the local slope locates the
    balance point. Falls back to ``0.9 * alpha`` when the width is flat, and
    never returns a split wider than that heuristic.
    """
    alpha = check_alpha(alpha)
    _require_paired(paired)
    if sim.cap_n < 1:
        raise DataError("optimizing the risk split needs at least one additional simulation")
    eps = alpha / 100.0
    cache = {}

    def width(delta):
        if delta not in cache:
            rect = rectifier_interval(paired, delta, config)
            fsim = _sim_interval(sim, alpha - delta, config)
            cache[delta] = rect.width + fsim.width
        return cache[delta]

    lo, hi = eps, alpha - eps
    heuristic = HEURISTIC_DELTA_SHARE * alpha
    if width(lo) == width(hi) == width(heuristic):
        return RiskSplit(heuristic, alpha)
    for _ in range(max_steps):
        if hi - lo < 1e-6 * alpha:
            break
        mid = 0.5 * (lo + hi)
        step = 0.25 * (hi - lo)
        if width(mid + step) < width(mid - step):
            lo = mid - step
        elif width(mid - step) < width(mid + step):
            hi = mid + step
        else:
            lo, hi = mid - step, mid + step
    best = min(cache, key=lambda d: (cache[d], abs(d - heuristic)))
    if width(heuristic) <= cache[best]:
        best = heuristic
    return RiskSplit(best, alpha)
