"""Synthetic real/proxy score populations with a known mean and tunable correlation.

Real scores are uniform on ``[max(0, 2μ-1), min(2μ, 1)]``, which has mean μ
and stays inside [0, 1]. Proxies mix an independent copy of the real
fluctuations (a random permutation of them) with the aligned fluctuations,

    proxy(s) = μ_sim + (1 - |s|) * noise + s * signal,   s in [-1, 1],

then clamp to [0, 1] and re-centre on μ_sim. The correlation moves
monotonically from about -1 at ``s = -1`` through about 0 at ``s = 0`` to 1 at
``s = 1``, so bisection on ``s`` reaches any target. The construction is
deterministic given the seed, and the same seed gives the same real scores
and noise for every target, so raising the target never lowers the
achieved correlation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .core import PairedDataset, SimDataset
from .exceptions import ConfigError, CorrelationTargetError

__all__ = ["BankSpec", "LabeledBank", "support", "generate_bank", "partition_bank"]

MAX_BISECTION_STEPS = 60
MEAN_DRIFT_TOLERANCE = 5e-3


def support(mu):
    """Interval of the uniform real-score distribution with mean ``mu``."""
    return max(0.0, 2.0 * mu - 1.0), min(2.0 * mu, 1.0)


@dataclass(frozen=True)
class BankSpec:
    mu_real: float = 0.5
    mu_sim: float = 0.5
    rho_target: float = 0.7
    size: int = 10000
    rho_tolerance: float = 0.01
    seed: int = 0

    def __post_init__(self):
        for name in ("mu_real", "mu_sim"):
            mu = getattr(self, name)
            if not 0.0 < mu < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {mu}")
        if not -1.0 <= self.rho_target <= 1.0:
            raise ConfigError(f"rho_target must lie in [-1, 1], got {self.rho_target}")
        if int(self.size) < 3:
            raise ConfigError(f"size must be at least 3, got {self.size}")
        if not self.rho_tolerance > 0.0:
            raise ConfigError(f"rho_tolerance must be positive, got {self.rho_tolerance}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class LabeledBank:
    """A synthetic population; ``true_mu`` is the exact mean of its real scores."""

    y: np.ndarray
    f: np.ndarray
    true_mu: float
    achieved_rho: float
    spec: BankSpec

    @property
    def size(self):
        return int(self.y.size)

    @property
    def pairs(self):
        return list(zip(self.y.tolist(), self.f.tolist()))

    @property
    def ids(self):
        return tuple(f"b{i}" for i in range(self.size))

    def as_paired(self):
        return PairedDataset(self.y, self.f, self.ids)


def _pearson(x, y):
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(np.dot(xc, xc)) * float(np.dot(yc, yc)))
    if denom == 0.0:
        return 0.0
    return float(np.dot(xc, yc)) / denom


def _recentre(p, target, rounds=50):
    p = np.clip(p, 0.0, 1.0)
    for _ in range(rounds):
        shift = target - p.mean()
        if abs(shift) < 1e-12:
            break
        p = np.clip(p + shift, 0.0, 1.0)
    return p


def generate_bank(spec):
    """Draw a bank whose real/proxy correlation is within tolerance of the target.

    Raises
    ------
    CorrelationTargetError
        The target is out of reach after clamping, or bisection stalled
        outside the tolerance. ``achieved_rho`` holds the closest value.
    """
    rng = np.random.default_rng(spec.seed)
    lo, hi = support(spec.mu_real)
    y = rng.uniform(lo, hi, size=int(spec.size))
    signal = y - y.mean()
    noise = rng.permutation(signal)

    if spec.rho_target == 1.0 and spec.mu_sim == spec.mu_real:
        f = y.copy()
        return _finish(y, f, spec)

    def proxy(s):
        return _recentre(spec.mu_sim + (1.0 - abs(s)) * noise + s * signal, spec.mu_sim)

    def rho(s):
        return _pearson(y, proxy(s))

    target, tol = spec.rho_target, spec.rho_tolerance
    a, b = -1.0, 1.0
    rho_a, rho_b = rho(a), rho(b)
    if target > rho_b + tol or target < rho_a - tol:
        closest = rho_b if target > rho_b else rho_a
        raise CorrelationTargetError(
            f"correlation {target} is unreachable with these means (range "
            f"[{rho_a:.4f}, {rho_b:.4f}])",
            achieved_rho=closest,
        )
    best_s, best_rho = (a, rho_a) if abs(rho_a - target) < abs(rho_b - target) else (b, rho_b)
    for _ in range(MAX_BISECTION_STEPS):
        if abs(best_rho - target) <= tol / 10.0:
            break
        mid = 0.5 * (a + b)
        r = rho(mid)
        if abs(r - target) < abs(best_rho - target):
            best_s, best_rho = mid, r
        if r < target:
            a = mid
        else:
            b = mid
    if abs(best_rho - target) > tol:
        raise CorrelationTargetError(
            f"reached correlation {best_rho:.4f}, outside {tol} of target {target}",
            achieved_rho=best_rho,
        )
    return _finish(y, proxy(best_s), spec)


def _finish(y, f, spec):
    y.setflags(write=False)
    f.setflags(write=False)
    return LabeledBank(
        y=y,
        f=f,
        true_mu=float(y.mean()),
        achieved_rho=_pearson(y, f),
        spec=spec,
    )


def partition_bank(bank, n, cap_n, heldout=0, seed=0):
    """Split a bank into disjoint paired, simulation-only and held-out parts.

    The simulation-only part keeps only the proxy scores.
    """
    n, cap_n, heldout = int(n), int(cap_n), int(heldout)
    if min(n, cap_n, heldout) < 0:
        raise ConfigError("partition sizes must be nonnegative")
    if n + cap_n + heldout > bank.size:
        raise ConfigError(
            f"requested {n} + {cap_n} + {heldout} samples from a bank of {bank.size}"
        )
    order = np.random.default_rng(seed).permutation(bank.size)
    ids = bank.ids
    parts = np.split(order[: n + cap_n + heldout], [n, n + cap_n])
    paired = PairedDataset(bank.y[parts[0]], bank.f[parts[0]], [ids[i] for i in parts[0]])
    sim = SimDataset(bank.f[parts[1]], [ids[i] for i in parts[1]])
    held = PairedDataset(bank.y[parts[2]], bank.f[parts[2]], [ids[i] for i in parts[2]])
    return paired, sim, held
