"""Seeded Monte Carlo sweeps over interval methods.

Every redraw ``i`` takes its randomness from ``SeedSequence([seed, i])`` (plus a
fixed tag per use), so results do not depend on how many redraws run, the
order they run in, or which grid point they belong to. Grid points share
redraw seeds, which acts as common random numbers across the swept axis.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .artificial import BankSpec, generate_bank, partition_bank, support
from .control_variates import cv_interval, cv_split_interval
from .core import ConfidenceInterval, Method, check_alpha, resample_paired, resample_sim
from .exceptions import ConfigError, DisjointIntervalsError, EmptyCandidateSetError
from .ppi import (
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
    "SweepConfig",
    "SyntheticSource",
    "CsvSource",
    "SweepResult",
    "CoverageResult",
    "SavingsResult",
    "compute_intervals",
    "draw_intervals",
    "run_width_sweep",
    "run_coverage_sweep",
    "compute_savings",
    "emit_results",
    "render_results",
    "load_results",
    "SWEEP_COLUMNS",
    "COVERAGE_COLUMNS",
    "SAVINGS_COLUMNS",
]

AXES = ("nsim", "rho", "alpha")
DELTA_POLICIES = ("heuristic", "optimized")
BANK_MODES = ("fresh", "bootstrap")
TRUTH_MODES = ("exact", "heldout")

SWEEP_COLUMNS = (
    "axis", "axis_value", "method", "mean_width", "se_width", "mean_lower", "mean_upper",
    "trunc_lo_freq", "trunc_hi_freq", "n", "N", "alpha", "delta", "redraws", "seed",
)
COVERAGE_COLUMNS = (
    "axis", "axis_value", "method", "coverage", "se", "trials", "n", "N", "alpha", "delta",
    "seed",
)
SAVINGS_COLUMNS = (
    "method", "mean_savings", "se_savings", "mean_n_classical", "censored", "redraws", "n",
    "N", "alpha", "seed",
)

# SeedSequence tags separating the independent streams of one redraw
_DATA, _ORDER, _CLASSICAL = 0, 1, 2

logger = logging.getLogger(__name__)


def _parse_methods(methods):
    out = []
    for m in methods:
        try:
            out.append(Method(m))
        except ValueError:
            raise ConfigError(f"unknown method {m!r}") from None
    return tuple(out)


@dataclass(frozen=True)
class SweepConfig:
    """Parameters of a width, coverage or savings experiment.

    ``cap_n`` is the number of additional simulations N. The value on the
    swept ``axis`` replaces the matching fixed parameter at each grid point.
    """

    methods: tuple = ("classical", "suresim", "suresim-ub", "two-stage", "two-stage-ub")
    axis: str = "nsim"
    grid: tuple = (1000,)
    n: int = 100
    cap_n: int = 1000
    alpha: float = 0.1
    rho: float = 0.97
    mu_real: float = 0.5
    mu_sim: float = 0.5
    redraws: int = 100
    trials: int = 1000
    seed: int = 0
    delta_policy: str = "heuristic"
    grid_size: Optional[int] = None
    wsr_c: float = 0.99
    rho_tol: float = 0.01
    bank_mode: str = "fresh"
    bank_multiplier: int = 2
    bank_size: int = 20000
    sim_with_replacement: bool = False
    split_frac: float = 0.2
    truth: str = "exact"
    heldout: int = 400
    savings_cap: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(m.value for m in _parse_methods(self.methods)))
        object.__setattr__(self, "grid", tuple(self.grid))
        if self.axis not in AXES:
            raise ConfigError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not self.grid:
            raise ConfigError("grid must not be empty")
        if self.redraws < 1:
            raise ConfigError(f"redraws must be at least 1, got {self.redraws}")
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        if self.delta_policy not in DELTA_POLICIES:
            raise ConfigError(f"delta_policy must be one of {DELTA_POLICIES}")
        if self.bank_mode not in BANK_MODES:
            raise ConfigError(f"bank_mode must be one of {BANK_MODES}")
        if self.truth not in TRUTH_MODES:
            raise ConfigError(f"truth must be one of {TRUTH_MODES}")
        if self.bank_multiplier < 1:
            raise ConfigError("bank_multiplier must be at least 1")
        if not 0.0 < self.wsr_c < 1.0:
            raise ConfigError(f"wsr_c must lie in (0, 1), got {self.wsr_c}")
        for value in self.grid:
            self.point(value)

    def point(self, value):
        """Fixed parameters with the swept one replaced by ``value``."""
        n, cap_n, alpha, rho = self.n, self.cap_n, self.alpha, self.rho
        if self.axis == "nsim":
            cap_n = int(value)
            if cap_n != value:
                raise ConfigError(f"N grid values must be integers, got {value}")
        elif self.axis == "alpha":
            alpha = value
        else:
            rho = value
        alpha = check_alpha(alpha)
        if n < 1 or cap_n < 0:
            raise ConfigError(f"need n >= 1 and N >= 0, got n={n}, N={cap_n}")
        if not -1.0 <= rho <= 1.0:
            raise ConfigError(f"rho must lie in [-1, 1], got {rho}")
        needs_sim = {"two-stage", "two-stage-ub", "cv", "cv-split"} & set(self.methods)
        if needs_sim and cap_n < 1:
            raise ConfigError(f"methods {sorted(needs_sim)} need N >= 1")
        return {"n": int(n), "cap_n": cap_n, "alpha": float(alpha), "rho": float(rho)}

    @property
    def wsr(self):
        return WsrConfig(grid_size=self.grid_size, c=self.wsr_c)

    def to_dict(self):
        d = asdict(self)
        d["methods"] = list(self.methods)
        d["grid"] = list(self.grid)
        return d


# --------------------------------------------------------------------------
# Data sources


def _seed_int(seq):
    return int(seq.generate_state(2, dtype=np.uint64)[0])


class SyntheticSource:
    """Draws paired/simulation sets from generated banks.

    In ``fresh`` mode every redraw generates its own bank of
    ``bank_multiplier * (n + N + heldout)`` samples. In ``bootstrap`` mode one
    bank of ``bank_size`` per correlation value is reused and only the
    partition changes.
    """

    supports_rho = True

    def __init__(self, mu_real=0.5, mu_sim=0.5, rho_tol=0.01, mode="fresh",
                 multiplier=2, bank_size=20000, seed=0):
        if mode not in BANK_MODES:
            raise ConfigError(f"bank mode must be one of {BANK_MODES}")
        self.mu_real = mu_real
        self.mu_sim = mu_sim
        self.rho_tol = rho_tol
        self.mode = mode
        self.multiplier = multiplier
        self.bank_size = bank_size
        self.seed = seed
        self._banks = {}

    @classmethod
    def from_config(cls, config):
        return cls(config.mu_real, config.mu_sim, config.rho_tol, config.bank_mode,
                   config.bank_multiplier, config.bank_size, config.seed)

    def describe(self):
        return {
            "type": "synthetic",
            "mu_real": self.mu_real,
            "mu_sim": self.mu_sim,
            "rho_tol": self.rho_tol,
            "mode": self.mode,
            "multiplier": self.multiplier,
            "bank_size": self.bank_size if self.mode == "bootstrap" else None,
        }

    def _bank(self, rho, size, seq):
        if self.mode == "bootstrap":
            key = float(rho)
            if key not in self._banks:
                spec = BankSpec(self.mu_real, self.mu_sim, rho, self.bank_size, self.rho_tol,
                                self.seed)
                self._banks[key] = generate_bank(spec)
            return self._banks[key]
        spec = BankSpec(self.mu_real, self.mu_sim, rho, size, self.rho_tol, _seed_int(seq))
        return generate_bank(spec)

    def draw(self, n, cap_n, rho, seq, heldout=0):
        """Return ``(paired, sim, true_mu, heldout_set)`` for one redraw."""
        bank_seq, part_seq = seq.spawn(2)
        size = self.multiplier * (n + cap_n + heldout)
        bank = self._bank(rho, size, bank_seq)
        paired, sim, held = partition_bank(bank, n, cap_n, heldout, _seed_int(part_seq))
        return paired, sim, bank.true_mu, held

    def draw_real(self, n, seq):
        """Real scores only, for Classical comparisons at other sample sizes."""
        rng = np.random.default_rng(seq)
        if self.mode == "bootstrap" and self._banks:
            bank = next(iter(self._banks.values()))
            if n > bank.size:
                return None
            return bank.y[rng.permutation(bank.size)[:n]]
        lo, hi = support(self.mu_real)
        return rng.uniform(lo, hi, size=n)


class CsvSource:
    """Redraws from a bank of real paired data plus a pool of simulation scores.

    Paired sets are drawn without replacement. Simulation sets are drawn
    without replacement unless ``sim_with_replacement`` is set, which allows
    N beyond the pool size.
    """

    supports_rho = False

    def __init__(self, paired_bank, sim_bank, sim_with_replacement=False):
        self.paired_bank = paired_bank
        self.sim_bank = sim_bank
        self.sim_with_replacement = sim_with_replacement

    def describe(self):
        return {
            "type": "csv",
            "paired_n": self.paired_bank.n,
            "sim_N": self.sim_bank.cap_n,
            "sim_with_replacement": self.sim_with_replacement,
        }

    def draw(self, n, cap_n, rho, seq, heldout=0):
        pseq, sseq = seq.spawn(2)
        if n > self.paired_bank.n:
            raise ConfigError(f"cannot draw n={n} from {self.paired_bank.n} paired samples")
        if not self.sim_with_replacement and cap_n > self.sim_bank.cap_n:
            raise ConfigError(
                f"cannot draw N={cap_n} from {self.sim_bank.cap_n} simulations without replacement"
            )
        paired = resample_paired(self.paired_bank, n, False, pseq)
        sim = resample_sim(self.sim_bank, cap_n, self.sim_with_replacement, sseq)
        return paired, sim, float(self.paired_bank.y.mean()), None

    def draw_real(self, n, seq):
        if n > self.paired_bank.n:
            return None
        rng = np.random.default_rng(seq)
        return self.paired_bank.y[rng.permutation(self.paired_bank.n)[:n]]


def _source_for(config, source):
    if source is None:
        return SyntheticSource.from_config(config)
    if hasattr(source, "true_mu") and hasattr(source, "spec"):
        bank = source
        src = SyntheticSource(bank.spec.mu_real, bank.spec.mu_sim, config.rho_tol, "bootstrap",
                              config.bank_multiplier, bank.size, bank.spec.seed)
        src._banks[float(bank.spec.rho_target)] = bank
        return src
    return source


# --------------------------------------------------------------------------
# Interval evaluation


def compute_intervals(methods, paired, sim, alpha, wsr=None, delta_policy="heuristic",
                      split_frac=0.2, random_state=None):
    """Evaluate each method on one dataset.

    Returns ``(intervals, delta)`` where ``intervals`` maps each method (plus
    the rectifier at the active delta) to its interval.
    """
    if delta_policy == "optimized" and sim.cap_n >= 1:
        split = optimize_risk_split(paired, sim, alpha, wsr)
    else:
        split = heuristic_split(alpha)
    out = {}
    for m in _parse_methods(methods):
        if m is Method.RECTIFIER:
            continue
        out[m] = _guarded(_METHOD_CALLS[m], m, alpha, paired, sim, alpha, wsr, split,
                          split_frac, random_state)
    out[Method.RECTIFIER] = _guarded(
        lambda: rectifier_interval(paired, split.delta, wsr), Method.RECTIFIER, split.delta
    )
    return out, split.delta


_METHOD_CALLS = {
    Method.CLASSICAL: lambda p, s, a, w, sp, fr, rs: classical_interval(p.y, a, w),
    Method.SURESIM: lambda p, s, a, w, sp, fr, rs: suresim_interval(p, s, a, w, rs),
    Method.SURESIM_UB: lambda p, s, a, w, sp, fr, rs: suresim_ub_interval(p, s, a, w, rs),
    Method.TWO_STAGE: lambda p, s, a, w, sp, fr, rs: two_stage_interval(p, s, a, sp, w),
    Method.TWO_STAGE_UB: lambda p, s, a, w, sp, fr, rs: two_stage_ub_interval(p, s, a, w),
    Method.CV_STANDARD: lambda p, s, a, w, sp, fr, rs: cv_interval(p, s, a),
    Method.CV_SPLIT: lambda p, s, a, w, sp, fr, rs: cv_split_interval(
        p, s, a, fr, 0 if rs is None else rs
    ),
}


def _guarded(call, method, alpha, *args):
    # an emptied candidate set or disjoint hedge is a miss, not a crash
    try:
        return call(*args)
    except (EmptyCandidateSetError, DisjointIntervalsError) as exc:
        logger.info("%s: %s; recorded as an empty interval", method.value, exc)
        return ConfidenceInterval.empty_set(alpha, method)


def _redraw_seq(seed, i, tag):
    return np.random.SeedSequence([int(seed), int(i), tag])


def draw_intervals(config, source, axis_value, redraw, heldout=0):
    """Intervals of one redraw at one grid point.

    Returns ``(intervals, delta, true_mu, heldout_set)``.
    """
    p = config.point(axis_value)
    paired, sim, true_mu, held = source.draw(
        p["n"], p["cap_n"], p["rho"], _redraw_seq(config.seed, redraw, _DATA), heldout
    )
    order_seed = _seed_int(_redraw_seq(config.seed, redraw, _ORDER))
    intervals, delta = compute_intervals(
        config.methods, paired, sim, p["alpha"], config.wsr, config.delta_policy,
        config.split_frac, order_seed,
    )
    return intervals, delta, true_mu, held


# --------------------------------------------------------------------------
# Results


def _config_hash(config_dict):
    blob = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _provenance(config, source, kind):
    cfg = config.to_dict()
    return {
        "kind": kind,
        "package": "ppieval",
        "version": __version__,
        "seed": config.seed,
        "config": cfg,
        "config_hash": _config_hash(cfg),
        "source": source.describe(),
    }


@dataclass
class _Result:
    records: list
    provenance: dict = field(default_factory=dict)

    kind = "result"
    columns = ()

    def rows(self, **match):
        return [r for r in self.records if all(r[k] == v for k, v in match.items())]

    def get(self, method, axis_value=None):
        for r in self.records:
            if r["method"] == method and (axis_value is None or r.get("axis_value") == axis_value):
                return r
        raise KeyError((method, axis_value))


@dataclass
class SweepResult(_Result):
    """Mean width ± standard error per grid point and method."""

    kind = "sweep"
    columns = SWEEP_COLUMNS


@dataclass
class CoverageResult(_Result):
    """Empirical coverage rate per grid point and method."""

    kind = "coverage"
    columns = COVERAGE_COLUMNS


@dataclass
class SavingsResult(_Result):
    """Hardware trials saved relative to Classical, per method."""

    kind = "savings"
    columns = SAVINGS_COLUMNS

    @property
    def any_censored(self):
        return any(r["censored"] > 0 for r in self.records)


def _mean_se(values):
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    se = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return mean, se


def _check_source(config, source):
    if config.axis == "rho" and not getattr(source, "supports_rho", False):
        raise ConfigError("the rho axis needs a synthetic source; real data has a fixed correlation")


def run_width_sweep(config, source=None):
    """Average interval widths over ``config.redraws`` redraws at each grid point.

    ``source`` is a :class:`SyntheticSource`, a :class:`CsvSource`, a
    :class:`~ppieval.artificial.LabeledBank` (reused across redraws), or None
    to build a synthetic source from ``config``.
    """
    source = _source_for(config, source)
    _check_source(config, source)
    records = []
    for value in config.grid:
        p = config.point(value)
        per_method = {}
        deltas = []
        for i in range(config.redraws):
            intervals, delta, _, _ = draw_intervals(config, source, value, i)
            deltas.append(delta)
            for m, ci in intervals.items():
                per_method.setdefault(m, []).append(ci)
        for m in list(_parse_methods(config.methods)) + [Method.RECTIFIER]:
            cis = per_method[m]
            mean_w, se_w = _mean_se([ci.width for ci in cis])
            records.append({
                "axis": config.axis,
                "axis_value": float(value),
                "method": m.value,
                "mean_width": mean_w,
                "se_width": se_w,
                "mean_lower": float(np.mean([ci.lower for ci in cis])),
                "mean_upper": float(np.mean([ci.upper for ci in cis])),
                "trunc_lo_freq": float(np.mean([ci.truncated_lower for ci in cis])),
                "trunc_hi_freq": float(np.mean([ci.truncated_upper for ci in cis])),
                "n": p["n"],
                "N": p["cap_n"],
                "alpha": p["alpha"],
                "delta": float(np.mean(deltas)),
                "redraws": config.redraws,
                "seed": config.seed,
            })
    return SweepResult(records, _provenance(config, source, "sweep"))


def run_coverage_sweep(config, source=None):
    """Fraction of ``config.trials`` redraws whose interval contains the true mean.

    With ``truth="exact"`` the target is the realized bank mean; with
    ``truth="heldout"`` it is the mean real score of ``config.heldout``
    samples held out from each redraw.
    """
    source = _source_for(config, source)
    _check_source(config, source)
    heldout = config.heldout if config.truth == "heldout" else 0
    if heldout < 0 or (config.truth == "heldout" and heldout < 1):
        raise ConfigError("heldout truth needs at least one held-out sample")
    records = []
    for value in config.grid:
        p = config.point(value)
        hits = {}
        deltas = []
        for i in range(config.trials):
            intervals, delta, true_mu, held = draw_intervals(config, source, value, i, heldout)
            target = true_mu if config.truth == "exact" else float(held.y.mean())
            deltas.append(delta)
            for m, ci in intervals.items():
                if m is Method.RECTIFIER:
                    continue
                hits.setdefault(m, []).append(ci.contains(target))
        for m in _parse_methods(config.methods):
            rate = float(np.mean(hits[m]))
            records.append({
                "axis": config.axis,
                "axis_value": float(value),
                "method": m.value,
                "coverage": rate,
                "se": math.sqrt(rate * (1.0 - rate) / config.trials),
                "trials": config.trials,
                "n": p["n"],
                "N": p["cap_n"],
                "alpha": p["alpha"],
                "delta": float(np.mean(deltas)),
                "seed": config.seed,
            })
    return CoverageResult(records, _provenance(config, source, "coverage"))


def compute_savings(config, source=None):
    """Fraction of real trials saved relative to Classical at matched width.

    For each redraw the method's width at ``n`` is compared with Classical's
    mean width (over ``config.redraws`` independent real-only draws) at
    increasing sample sizes ``n'``. The smallest ``n'`` at which Classical is
    tighter gives savings ``(n' - n) / n'``. The search doubles ``n'`` and then
    bisects; it stops at ``config.savings_cap`` (default ``20 n``) and marks
    the redraw as censored.
    """
    source = _source_for(config, source)
    p = config.point(config.grid[0] if config.axis != "nsim" else config.cap_n)
    n, alpha = p["n"], p["alpha"]
    cap = config.savings_cap or 20 * n
    wsr = config.wsr
    classical_widths = {}

    def classical_width(k):
        if k not in classical_widths:
            widths = []
            for j in range(config.redraws):
                y = source.draw_real(k, np.random.SeedSequence([config.seed, _CLASSICAL, k, j]))
                if y is None:
                    classical_widths[k] = None
                    return None
                ci = _guarded(classical_interval, Method.CLASSICAL, alpha, y, alpha, wsr)
                widths.append(ci.width)
            classical_widths[k] = float(np.mean(widths))
        return classical_widths[k]

    def tighter(k, target):
        w = classical_width(k)
        return w is not None and w < target

    def equivalent_n(target):
        # smallest k with classical mean width < target; returns (k, censored)
        if tighter(n, target):
            lo, hi = 0, n
        else:
            lo = hi = n
            while True:
                nxt = min(2 * hi, cap)
                if nxt == hi:
                    return hi, True
                lo, hi = hi, nxt
                w = classical_width(hi)
                if w is None:
                    return lo, True
                if w < target:
                    break
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if tighter(mid, target):
                hi = mid
            else:
                lo = mid
        return max(hi, 1), False

    methods = [m for m in _parse_methods(config.methods)]
    per_method = {m: [] for m in methods}
    for i in range(config.redraws):
        paired, sim, _, _ = source.draw(n, p["cap_n"], p["rho"],
                                        _redraw_seq(config.seed, i, _DATA))
        order_seed = _seed_int(_redraw_seq(config.seed, i, _ORDER))
        intervals, _ = compute_intervals(methods, paired, sim, alpha, wsr, config.delta_policy,
                                         config.split_frac, order_seed)
        for m in methods:
            k, censored = equivalent_n(intervals[m].width)
            per_method[m].append(((k - n) / k, k, censored))
    records = []
    for m in methods:
        savings = [s for s, _, _ in per_method[m]]
        mean_s, se_s = _mean_se(savings)
        records.append({
            "method": m.value,
            "mean_savings": mean_s,
            "se_savings": se_s,
            "mean_n_classical": float(np.mean([k for _, k, _ in per_method[m]])),
            "censored": int(sum(c for _, _, c in per_method[m])),
            "redraws": config.redraws,
            "n": n,
            "N": p["cap_n"],
            "alpha": alpha,
            "seed": config.seed,
        })
    return SavingsResult(records, _provenance(config, source, "savings"))


# --------------------------------------------------------------------------
# Emission


_INT_COLUMNS = {"n", "N", "redraws", "seed", "trials", "censored"}
_STR_COLUMNS = {"axis", "method"}


def _fmt(value):
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _meta_path(path):
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def render_results(result, fmt):
    """Serialize a result's records as CSV text or a JSON document.

    CSV output carries no provenance; :func:`emit_results` writes it to a
    sidecar file.
    """
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(result.columns)
        for r in result.records:
            writer.writerow([_fmt(r[c]) for c in result.columns])
        return buf.getvalue()
    if fmt == "json":
        payload = {
            "kind": result.kind,
            "columns": list(result.columns),
            "provenance": result.provenance,
            "records": result.records,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    raise ConfigError(f"format must be csv or json, got {fmt!r}")


def emit_results(result, fmt, path):
    """Write a result as long-format CSV (plus ``<path>.meta.json``) or JSON."""
    path = Path(path)
    path.write_text(render_results(result, fmt), encoding="utf-8")
    if fmt == "csv":
        _meta_path(path).write_text(
            json.dumps(result.provenance, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def _parse_cell(column, text):
    if column in _STR_COLUMNS:
        return text
    if column in _INT_COLUMNS:
        return int(text)
    return float(text)


def load_results(path, fmt=None):
    """Read back records written by :func:`emit_results`.

    Returns ``(records, provenance)``.
    """
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".")
    if fmt == "json":
        payload = json.loads(path.read_text(encoding="utf-8"))
        return payload["records"], payload["provenance"]
    if fmt != "csv":
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        records = [{k: _parse_cell(k, v) for k, v in row.items()} for row in reader]
    meta = _meta_path(path)
    provenance = json.loads(meta.read_text(encoding="utf-8")) if meta.exists() else {}
    return records, provenance
