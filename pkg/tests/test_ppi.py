import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ppieval import BankSpec, generate_bank, partition_bank
from ppieval.core import ConfidenceInterval, Method, PairedDataset, SimDataset
from ppieval.exceptions import ConfigError, DataError, DisjointIntervalsError
from ppieval.ppi import (
    HEDGE_SHARE,
    RiskSplit,
    _intersect,
    _sim_interval,
    build_uniform_transform,
    classical_interval,
    heuristic_split,
    optimize_risk_split,
    rectifier_interval,
    suresim_interval,
    suresim_ub_interval,
    two_stage_interval,
    two_stage_point_estimate,
    two_stage_ub_interval,
    uniform_point_estimate,
)

unit = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def paired_and_sim(draw, max_n=25, max_cap=60, min_cap=1):
    n = draw(st.integers(1, max_n))
    cap = draw(st.integers(min_cap, max_cap))
    y = draw(arrays(float, n, elements=unit))
    f = draw(arrays(float, n, elements=unit))
    fs = draw(arrays(float, cap, elements=unit))
    return PairedDataset(y, f), SimDataset(fs)


@settings(max_examples=60, deadline=None)
@given(paired_and_sim(min_cap=0))
def test_uniform_transform_structure(data):
    paired, sim = data
    t = build_uniform_transform(paired, sim)
    assert t.indicator_count == paired.n
    assert t.delta_values.size == paired.n + sim.cap_n
    lo, hi = t.bounds
    assert np.all(t.delta_values >= lo - 1e-12) and np.all(t.delta_values <= hi + 1e-12)
    pooled = np.concatenate([paired.f, sim.f]).mean()
    assert t.estimate == pytest.approx(pooled + paired.rectifier.mean(), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(paired_and_sim(), st.randoms(use_true_random=False))
def test_point_estimates_are_permutation_invariant(data, rnd):
    paired, sim = data
    pi = list(range(paired.n))
    si = list(range(sim.cap_n))
    rnd.shuffle(pi)
    rnd.shuffle(si)
    p2, s2 = paired.take(pi), SimDataset(sim.f[si])
    assert uniform_point_estimate(p2, s2) == pytest.approx(uniform_point_estimate(paired, sim))
    assert two_stage_point_estimate(p2, s2) == pytest.approx(two_stage_point_estimate(paired, sim))


def test_suresim_without_extra_sims_matches_classical_over_widened_range(rng):
    y = rng.uniform(size=40)
    paired = PairedDataset(y, rng.uniform(size=40))
    ci = suresim_interval(paired, SimDataset([]), 0.1)
    assert ci.estimate == pytest.approx(y.mean())
    assert ci.contains(y.mean())


def test_suresim_is_deterministic_and_order_seed_matters(small_sets):
    paired, sim = small_sets
    a = suresim_interval(paired, sim, 0.1)
    assert a == suresim_interval(paired, sim, 0.1)
    widths = {suresim_interval(paired, sim, 0.1, random_state=s).width for s in range(5)}
    assert len(widths) > 1


@settings(max_examples=30, deadline=None)
@given(paired_and_sim())
def test_hedged_intervals_never_wider_than_classical_share(data):
    paired, sim = data
    hedge = classical_interval(paired.y, (1 - HEDGE_SHARE) * 0.1)
    for fn in (suresim_ub_interval, two_stage_ub_interval):
        try:
            ci = fn(paired, sim, 0.1)
        except DisjointIntervalsError:
            continue
        assert ci.width <= hedge.width + 1e-12
        assert hedge.lower - 1e-12 <= ci.lower and ci.upper <= hedge.upper + 1e-12


def test_two_stage_is_sum_of_components(small_sets):
    paired, sim = small_sets
    split = RiskSplit(0.06, 0.1)
    rect = rectifier_interval(paired, 0.06)
    fs = _sim_interval(sim, 0.04, None)
    ci = two_stage_interval(paired, sim, 0.1, split)
    assert ci.raw_lower == pytest.approx(fs.lower + rect.lower)
    assert ci.raw_upper == pytest.approx(fs.upper + rect.upper)
    assert ci.method is Method.TWO_STAGE


def test_rectifier_is_not_clipped():
    paired = PairedDataset(np.full(30, 0.0), np.full(30, 0.9))
    ci = rectifier_interval(paired, 0.1)
    assert ci.lower < 0.0 and ci.method is Method.RECTIFIER


def test_two_stage_argument_checks(small_sets):
    paired, sim = small_sets
    with pytest.raises(DataError):
        two_stage_interval(paired, SimDataset([]), 0.1)
    with pytest.raises(ConfigError):
        two_stage_interval(paired, sim, 0.1, heuristic_split(0.05))
    with pytest.raises(ConfigError):
        RiskSplit(0.1, 0.1)
    assert heuristic_split(0.1).delta == pytest.approx(0.09)
    assert heuristic_split(0.1).remainder == pytest.approx(0.01)


def test_disjoint_hedge_raises():
    a = ConfidenceInterval(0.1, 0.2, 0.1, Method.SURESIM)
    b = ConfidenceInterval(0.3, 0.4, 0.1, Method.CLASSICAL)
    with pytest.raises(DisjointIntervalsError):
        _intersect(a, b, 0.1, Method.SURESIM_UB)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_optimized_split_beats_exhaustive_sweep_within_one_cell(seed):
    bank = generate_bank(BankSpec(0.5, 0.5, 0.8, 3000, seed=seed))
    paired, sim, _ = partition_bank(bank, 60, 300, seed=seed)
    alpha = 0.1

    def width(d):
        return (rectifier_interval(paired, d).width + _sim_interval(sim, alpha - d, None).width)

    sweep = np.linspace(alpha / 100, alpha - alpha / 100, 50)
    widths = [width(d) for d in sweep]
    best = optimize_risk_split(paired, sim, alpha)
    assert width(best.delta) <= width(heuristic_split(alpha).delta) + 1e-12
    i = int(np.argmin(widths))
    cell = sweep[1] - sweep[0]
    near = abs(best.delta - sweep[i]) <= cell + 1e-12
    assert near or width(best.delta) <= widths[i] + 2e-3


def test_suresim_covers_when_simulator_is_biased():
    # paired and extra values differ in mean, which is why the order is shuffled
    bank = generate_bank(BankSpec(0.6, 0.35, 0.8, 40000, seed=11))
    hits = 0
    trials = 150
    for t in range(trials):
        paired, sim, _ = partition_bank(bank, 50, 500, seed=t)
        hits += suresim_interval(paired, sim, 0.1).contains(bank.true_mu)
    se = math.sqrt(0.09 / trials)
    assert hits / trials >= 0.9 - 3 * se
