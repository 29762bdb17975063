"""scikit-learn style wrappers around the interval functions.

Each estimator is configured in ``__init__``, fitted on arrays with
``fit(y, f=None, f_sim=None)``, and exposes the fitted interval through
trailing-underscore attributes::

    >>> est = UniformPPIInterval(alpha=0.1).fit(y, f, f_sim)
    >>> est.lower_, est.upper_

``y`` holds the real scores of the paired set, ``f`` the simulation scores
of the same environments and ``f_sim`` the additional simulation scores.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, column_or_1d

from .control_variates import cv_interval, cv_split_interval
from .core import PairedDataset, SimDataset, check_alpha
from .exceptions import ConfigError, DataError
from .ppi import (
    RiskSplit,
    classical_interval,
    heuristic_split,
    optimize_risk_split,
    rectifier_interval,
    suresim_interval,
    suresim_ub_interval,
    two_stage_interval,
    two_stage_ub_interval,
)
from .wsr import WsrConfig

__all__ = [
    "ClassicalMeanInterval",
    "UniformPPIInterval",
    "TwoStagePPIInterval",
    "ControlVariateInterval",
    "RectifierInterval",
]


def _scores(values, name):
    if values is None:
        raise DataError(f"{name} is required for this estimator")
    try:
        arr = column_or_1d(np.asarray(values, dtype=float), warn=False)
    except ValueError as exc:
        raise DataError(f"{name}: {exc}") from None
    return arr


class _IntervalEstimator(BaseEstimator):
    needs_pairs = True
    needs_sim = True

    def _wsr(self):
        return WsrConfig(grid_size=getattr(self, "grid_size", None), c=getattr(self, "c", 0.99))

    def _datasets(self, y, f, f_sim):
        y = _scores(y, "y")
        paired = sim = None
        if self.needs_pairs:
            f = _scores(f, "f")
            if f.shape != y.shape:
                raise DataError(f"y and f must have the same length, got {y.size} and {f.size}")
            paired = PairedDataset(y, f)
        if self.needs_sim:
            sim = SimDataset(_scores(f_sim, "f_sim"))
        return y, paired, sim

    def fit(self, y, f=None, f_sim=None):
        """Compute the interval.

        Parameters
        ----------
        y : array-like of shape (n,)
            Real scores in [0, 1].
        f : array-like of shape (n,), optional
            Simulation scores paired with ``y``.
        f_sim : array-like of shape (N,), optional
            Additional simulation scores.

        Returns
        -------
        self
        """
        y, paired, sim = self._datasets(y, f, f_sim)
        ci = self._interval(y, paired, sim)
        self.interval_ = ci
        self.lower_ = ci.lower
        self.upper_ = ci.upper
        self.width_ = ci.width
        self.estimate_ = ci.estimate
        self.n_paired_ = int(y.size)
        self.n_sim_ = 0 if sim is None else sim.cap_n
        return self

    def predict(self, X=None):
        """Return ``[[lower, upper]]`` for the fitted interval."""
        check_is_fitted(self, "interval_")
        return np.array([[self.lower_, self.upper_]])

    def _interval(self, y, paired, sim):
        raise NotImplementedError


class ClassicalMeanInterval(_IntervalEstimator):
    """WSR interval from the real scores alone; ``f`` and ``f_sim`` are ignored."""

    needs_pairs = False
    needs_sim = False

    def __init__(self, alpha=0.1, grid_size=None, c=0.99):
        self.alpha = alpha
        self.grid_size = grid_size
        self.c = c

    def _interval(self, y, paired, sim):
        return classical_interval(y, self.alpha, self._wsr())


class UniformPPIInterval(_IntervalEstimator):
    """Single-transform PPI interval; ``hedge=True`` intersects it with Classical."""

    def __init__(self, alpha=0.1, hedge=False, grid_size=None, c=0.99, random_state=None):
        self.alpha = alpha
        self.hedge = hedge
        self.grid_size = grid_size
        self.c = c
        self.random_state = random_state

    def _interval(self, y, paired, sim):
        fn = suresim_ub_interval if self.hedge else suresim_interval
        return fn(paired, sim, self.alpha, self._wsr(), self.random_state)


class TwoStagePPIInterval(_IntervalEstimator):
    """Rectifier interval plus additional-simulation interval.

    Parameters
    ----------
    alpha : float
    delta : {"heuristic", "optimize"} or float
        Budget for the rectifier. ``"heuristic"`` uses ``0.9 * alpha`` and
        ``"optimize"`` searches for the narrowest split on the data.
    hedge : bool
        Intersect with a Classical interval. The hedged form always uses
        the heuristic split.
    """

    def __init__(self, alpha=0.1, delta="heuristic", hedge=False, grid_size=None, c=0.99):
        self.alpha = alpha
        self.delta = delta
        self.hedge = hedge
        self.grid_size = grid_size
        self.c = c

    def _split(self, paired, sim):
        alpha = check_alpha(self.alpha)
        if self.delta == "heuristic":
            return heuristic_split(alpha)
        if self.delta == "optimize":
            return optimize_risk_split(paired, sim, alpha, self._wsr())
        if isinstance(self.delta, str):
            raise ConfigError(f"delta must be 'heuristic', 'optimize' or a number, got {self.delta!r}")
        return RiskSplit(float(self.delta), alpha)

    def _interval(self, y, paired, sim):
        if self.hedge:
            if self.delta != "heuristic":
                raise ConfigError("the hedged two-stage interval only supports delta='heuristic'")
            return two_stage_ub_interval(paired, sim, self.alpha, self._wsr())
        split = self._split(paired, sim)
        self.delta_ = split.delta
        return two_stage_interval(paired, sim, self.alpha, split, self._wsr())


class ControlVariateInterval(_IntervalEstimator):
    """Chebyshev interval around the control-variate estimate.

    ``split_fraction=None`` fits the coefficient on all paired samples;
    a number in (0, 1) holds that share out for fitting.
    """

    def __init__(self, alpha=0.1, split_fraction=None, random_state=0):
        self.alpha = alpha
        self.split_fraction = split_fraction
        self.random_state = random_state

    def _interval(self, y, paired, sim):
        if self.split_fraction is None:
            return cv_interval(paired, sim, self.alpha)
        return cv_split_interval(paired, sim, self.alpha, self.split_fraction, self.random_state)


class RectifierInterval(_IntervalEstimator):
    """Interval on the mean of ``y - f`` over [-1, 1], at level ``delta``."""

    needs_sim = False

    def __init__(self, delta=0.09, grid_size=None, c=0.99):
        self.delta = delta
        self.grid_size = grid_size
        self.c = c

    def _interval(self, y, paired, sim):
        return rectifier_interval(paired, check_alpha(self.delta, "delta"), self._wsr())
