"""Domain types, CSV I/O, summary statistics and paired-set resampling."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .exceptions import ConfigError, DataError

__all__ = [
    "Method",
    "ConfidenceInterval",
    "PairedDataset",
    "SimDataset",
    "SummaryStats",
    "check_alpha",
    "load_paired_dataset",
    "load_sim_dataset",
    "write_paired_dataset",
    "write_sim_dataset",
    "summary_stats",
    "resample_paired",
    "resample_sim",
]


class Method(str, enum.Enum):
    """Interval construction tags. Values double as CLI method names."""

    CLASSICAL = "classical"
    SURESIM = "suresim"
    SURESIM_UB = "suresim-ub"
    TWO_STAGE = "two-stage"
    TWO_STAGE_UB = "two-stage-ub"
    CV_STANDARD = "cv"
    CV_SPLIT = "cv-split"
    RECTIFIER = "rectifier"

    def __str__(self):
        return self.value


WSR_METHODS = (
    Method.CLASSICAL,
    Method.SURESIM,
    Method.SURESIM_UB,
    Method.TWO_STAGE,
    Method.TWO_STAGE_UB,
)


def check_alpha(alpha, name="alpha"):
    """Return ``alpha`` as a float, raising ConfigError unless 0 < alpha < 1."""
    try:
        alpha = float(alpha)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a real number, got {alpha!r}") from None
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"{name} must lie strictly inside (0, 1), got {alpha}")
    return alpha


@dataclass(frozen=True)
class ConfidenceInterval:
    """A two-sided interval on a mean.

    ``raw_lower``/``raw_upper`` hold the bounds before any [0, 1] clipping.
    The truncation flags record that a bound reached (or crossed) the edge of
    the metric range and was clipped there. ``empty`` marks a placeholder for
    a rejected-everything outcome; see :meth:`empty_set`.
    """

    lower: float
    upper: float
    alpha: float
    method: Method
    truncated_lower: bool = False
    truncated_upper: bool = False
    raw_lower: Optional[float] = None
    raw_upper: Optional[float] = None
    estimate: Optional[float] = None
    empty: bool = False

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")
        if self.raw_lower is None:
            object.__setattr__(self, "raw_lower", self.lower)
        if self.raw_upper is None:
            object.__setattr__(self, "raw_upper", self.upper)

    @property
    def width(self):
        return self.upper - self.lower

    @property
    def raw_width(self):
        return self.raw_upper - self.raw_lower

    def contains(self, value):
        return not self.empty and self.lower <= value <= self.upper

    @classmethod
    def empty_set(cls, alpha, method, estimate=None):
        """Placeholder for a construction whose candidate set came out empty.

        It has zero width at the point estimate (or 0.5 without one) and
        contains nothing.
        """
        at = 0.5 if estimate is None else min(max(float(estimate), 0.0), 1.0)
        return cls(at, at, alpha, Method(method), estimate=estimate, empty=True)

    @classmethod
    def clipped(cls, raw_lower, raw_upper, alpha, method, estimate=None):
        """Build an interval truncated to [0, 1] from raw bounds."""
        lower = min(max(raw_lower, 0.0), 1.0)
        upper = max(min(raw_upper, 1.0), 0.0)
        return cls(
            lower=lower,
            upper=upper,
            alpha=alpha,
            method=Method(method),
            truncated_lower=raw_lower <= 0.0,
            truncated_upper=raw_upper >= 1.0,
            raw_lower=float(raw_lower),
            raw_upper=float(raw_upper),
            estimate=estimate,
        )

    def to_dict(self):
        return {
            "method": self.method.value,
            "alpha": self.alpha,
            "lower": self.lower,
            "upper": self.upper,
            "width": self.width,
            "truncated_lower": self.truncated_lower,
            "truncated_upper": self.truncated_upper,
        }


def _as_scores(values, what):
    arr = np.array(values, dtype=float).reshape(-1)
    if arr.size and not np.all(np.isfinite(arr)):
        raise DataError(f"{what} contains non-finite values")
    bad = np.flatnonzero((arr < 0.0) | (arr > 1.0))
    if bad.size:
        i = int(bad[0])
        raise DataError(f"score out of range at row {i + 1}: {what}={arr[i]!r} not in [0, 1]")
    arr.setflags(write=False)
    return arr


def _as_ids(ids, size, prefix):
    if ids is None:
        return tuple(f"{prefix}{i}" for i in range(size))
    ids = tuple(str(i) for i in ids)
    if len(ids) != size:
        raise DataError(f"got {len(ids)} ids for {size} samples")
    return ids


@dataclass(frozen=True, eq=False)
class PairedDataset:
    """Matched (real score, simulation score) samples.

    Parameters
    ----------
    y : array-like of shape (n,)
        Real outcomes in [0, 1].
    f : array-like of shape (n,)
        Simulation predictions for the same environments, in [0, 1].
    ids : sequence of str, optional
        Unique sample identifiers. Generated as ``p0, p1, ...`` if omitted.
    """

    y: np.ndarray
    f: np.ndarray
    ids: tuple = field(default=None)

    def __post_init__(self):
        y = _as_scores(self.y, "y")
        f = _as_scores(self.f, "f")
        if y.shape != f.shape:
            raise DataError(f"y has {y.size} entries but f has {f.size}")
        ids = _as_ids(self.ids, y.size, "p")
        if len(set(ids)) != len(ids):
            seen = set()
            for row, i in enumerate(ids, start=1):
                if i in seen:
                    raise DataError(f"duplicate id {i!r} at row {row}")
                seen.add(i)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "ids", ids)

    @property
    def n(self):
        return int(self.y.size)

    def __len__(self):
        return self.n

    @property
    def rectifier(self):
        """Per-sample differences ``y - f``, bounded in [-1, 1]."""
        return self.y - self.f

    def take(self, index, ids=None):
        index = np.asarray(index, dtype=int)
        if ids is None:
            ids = [self.ids[i] for i in index]
        return PairedDataset(self.y[index], self.f[index], ids)


@dataclass(frozen=True, eq=False)
class SimDataset:
    """Unpaired simulation scores (the additional evaluations)."""

    f: np.ndarray
    ids: tuple = field(default=None)

    def __post_init__(self):
        f = _as_scores(self.f, "f")
        ids = _as_ids(self.ids, f.size, "s")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "ids", ids)

    @property
    def cap_n(self):
        return int(self.f.size)

    def __len__(self):
        return self.cap_n

    @property
    def scores(self):
        return self.f


# --------------------------------------------------------------------------
# CSV I/O


def _read_rows(path, header):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected header {','.join(header)}") from None
        if [h.strip() for h in first] != list(header):
            raise DataError(f"{path}: expected header {','.join(header)}, got {','.join(first)}")
        rows = []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: malformed row {row_no}: expected {len(header)} fields")
            rows.append((row_no, [c.strip() for c in row]))
    return rows


def _parse_score(text, row_no, name, path):
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"{path}: malformed row {row_no}: {name}={text!r} is not a number") from None
    if not (0.0 <= value <= 1.0):
        raise DataError(f"score out of range at row {row_no}: {name}={value!r}")
    return value


def _check_unique(ids, row_numbers, path):
    seen = set()
    for i, row_no in zip(ids, row_numbers):
        if i in seen:
            raise DataError(f"{path}: duplicate id {i!r} at row {row_no}")
        seen.add(i)


def load_paired_dataset(path):
    """Read a ``id,y,f`` CSV file, preserving row order."""
    rows = _read_rows(path, ("id", "y", "f"))
    ids, ys, fs = [], [], []
    for row_no, (i, y, f) in rows:
        ids.append(i)
        ys.append(_parse_score(y, row_no, "y", path))
        fs.append(_parse_score(f, row_no, "f", path))
    _check_unique(ids, [r for r, _ in rows], path)
    return PairedDataset(np.array(ys), np.array(fs), ids)


def load_sim_dataset(path):
    """Read a ``id,f`` CSV file, preserving row order."""
    rows = _read_rows(path, ("id", "f"))
    ids, fs = [], []
    for row_no, (i, f) in rows:
        ids.append(i)
        fs.append(_parse_score(f, row_no, "f", path))
    _check_unique(ids, [r for r, _ in rows], path)
    return SimDataset(np.array(fs, dtype=float), ids)


def write_paired_dataset(dataset, path):
    """Write ``id,y,f`` CSV. Floats use the shortest round-trip repr."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "y", "f"])
        for i, y, f in zip(dataset.ids, dataset.y, dataset.f):
            writer.writerow([i, repr(float(y)), repr(float(f))])


def write_sim_dataset(dataset, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "f"])
        for i, f in zip(dataset.ids, dataset.f):
            writer.writerow([i, repr(float(f))])


# --------------------------------------------------------------------------
# Summary statistics


@dataclass(frozen=True)
class SummaryStats:
    """Per-experiment summary. ``rho`` is None when either margin is constant."""

    n: int
    cap_n: int
    rho: Optional[float]
    mean_y: float
    mean_f_paired: float
    mean_f_sim: Optional[float]
    var_y: float
    var_rect: float

    def to_dict(self):
        return {
            "n": self.n,
            "N": self.cap_n,
            "rho": self.rho,
            "mean_y": self.mean_y,
            "mean_f_paired": self.mean_f_paired,
            "mean_f_sim": self.mean_f_sim,
            "var_y": self.var_y,
            "var_rect": self.var_rect,
        }


def summary_stats(paired, sim):
    """Sample correlation, means and (n-1)-denominator variances.

    Raises
    ------
    DataError
        If the paired set has fewer than two samples.
    """
    if paired.n < 2:
        raise DataError(f"summary statistics need at least 2 paired samples, got {paired.n}")
    y, f = paired.y, paired.f
    var_y = float(np.var(y, ddof=1))
    var_f = float(np.var(f, ddof=1))
    var_rect = float(np.var(y - f, ddof=1))
    if var_y == 0.0 or var_f == 0.0:
        rho = None
    else:
        cov = float(np.sum((y - y.mean()) * (f - f.mean())) / (paired.n - 1))
        rho = float(np.clip(cov / math.sqrt(var_y * var_f), -1.0, 1.0))
    return SummaryStats(
        n=paired.n,
        cap_n=sim.cap_n,
        rho=rho,
        mean_y=float(y.mean()),
        mean_f_paired=float(f.mean()),
        mean_f_sim=float(sim.f.mean()) if sim.cap_n else None,
        var_y=var_y,
        var_rect=var_rect,
    )


# --------------------------------------------------------------------------
# Resampling


def _draw_index(size, n, with_replacement, seed):
    if n < 0:
        raise ConfigError(f"sample size must be nonnegative, got {n}")
    if not with_replacement and n > size:
        raise ConfigError(f"cannot draw {n} samples without replacement from {size}")
    if with_replacement and size == 0 and n > 0:
        raise ConfigError("cannot draw from an empty dataset")
    rng = np.random.default_rng(seed)
    if with_replacement:
        return rng.integers(0, size, size=n)
    return rng.permutation(size)[:n]


def _dedupe(ids, index):
    # repeated draws get a "~k" suffix so ids stay unique
    counts = {}
    out = []
    for i in index:
        k = counts.get(i, 0)
        counts[i] = k + 1
        out.append(ids[i] if k == 0 else f"{ids[i]}~{k}")
    return out


def resample_paired(bank, n, with_replacement=False, seed=0):
    """Draw ``n`` paired samples uniformly, keeping each (y, f) pair intact.

    With replacement, repeated draws of the same sample get an ``~k`` id
    suffix so ids stay unique. ``seed`` may be anything accepted by
    ``numpy.random.default_rng``.
    """
    index = _draw_index(bank.n, n, with_replacement, seed)
    ids = _dedupe(bank.ids, index) if with_replacement else None
    return bank.take(index, ids)


def resample_sim(bank, cap_n, with_replacement=False, seed=0):
    """Draw ``cap_n`` simulation scores uniformly from ``bank``."""
    index = _draw_index(bank.cap_n, cap_n, with_replacement, seed)
    ids = _dedupe(bank.ids, index) if with_replacement else [bank.ids[i] for i in index]
    return SimDataset(bank.f[index], ids)


def as_paired(y, f, ids: Optional[Sequence] = None):
    """Coerce arrays (or an existing dataset) to a PairedDataset."""
    if isinstance(y, PairedDataset):
        return y
    return PairedDataset(np.asarray(y, dtype=float), np.asarray(f, dtype=float), ids)


def as_sim(f):
    if isinstance(f, SimDataset):
        return f
    if f is None:
        return SimDataset(np.empty(0))
    return SimDataset(np.asarray(f, dtype=float))
