import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from ppieval.control_variates import cv_interval, cv_split_interval
from ppieval.estimators import (
    ClassicalMeanInterval,
    ControlVariateInterval,
    RectifierInterval,
    TwoStagePPIInterval,
    UniformPPIInterval,
)
from ppieval.exceptions import ConfigError, DataError
from ppieval.ppi import (
    classical_interval,
    optimize_risk_split,
    rectifier_interval,
    suresim_interval,
    suresim_ub_interval,
    two_stage_interval,
    two_stage_ub_interval,
)


@pytest.fixture
def arrays(small_sets):
    paired, sim = small_sets
    return paired, sim, (paired.y, paired.f, sim.f)


def test_estimators_match_functional_api(arrays):
    paired, sim, (y, f, fs) = arrays
    cases = [
        (ClassicalMeanInterval(alpha=0.05), classical_interval(y, 0.05)),
        (UniformPPIInterval(random_state=3), suresim_interval(paired, sim, 0.1, None, 3)),
        (UniformPPIInterval(hedge=True, random_state=3),
         suresim_ub_interval(paired, sim, 0.1, None, 3)),
        (TwoStagePPIInterval(), two_stage_interval(paired, sim, 0.1)),
        (TwoStagePPIInterval(hedge=True), two_stage_ub_interval(paired, sim, 0.1)),
        (TwoStagePPIInterval(delta="optimize"),
         two_stage_interval(paired, sim, 0.1, optimize_risk_split(paired, sim, 0.1))),
        (ControlVariateInterval(), cv_interval(paired, sim, 0.1)),
        (ControlVariateInterval(split_fraction=0.2, random_state=1),
         cv_split_interval(paired, sim, 0.1, 0.2, 1)),
        (RectifierInterval(delta=0.09), rectifier_interval(paired, 0.09)),
    ]
    for est, expected in cases:
        est.fit(y, f, fs)
        assert est.interval_ == expected, type(est).__name__
        assert (est.lower_, est.upper_, est.width_) == (
            expected.lower, expected.upper, expected.width)
        np.testing.assert_array_equal(est.predict(), [[expected.lower, expected.upper]])


def test_params_and_clone():
    est = TwoStagePPIInterval(alpha=0.05, delta=0.03)
    assert est.get_params() == {"alpha": 0.05, "delta": 0.03, "hedge": False,
                                "grid_size": None, "c": 0.99}
    other = clone(est).set_params(alpha=0.2)
    assert other.alpha == 0.2 and est.alpha == 0.05


def test_numeric_delta_and_fitted_delta(arrays):
    _, _, data = arrays
    est = TwoStagePPIInterval(delta=0.05).fit(*data)
    assert est.delta_ == 0.05
    with pytest.raises(ConfigError):
        TwoStagePPIInterval(delta="best").fit(*data)
    with pytest.raises(ConfigError):
        TwoStagePPIInterval(delta=0.05, hedge=True).fit(*data)


def test_unfitted_predict_raises():
    with pytest.raises(NotFittedError):
        ClassicalMeanInterval().predict()


def test_input_validation(arrays):
    _, _, (y, f, fs) = arrays
    with pytest.raises(DataError):
        UniformPPIInterval().fit(y, f)
    with pytest.raises(DataError):
        UniformPPIInterval().fit(y, f[:-1], fs)
    with pytest.raises(DataError):
        ClassicalMeanInterval().fit(np.c_[y, y])
    with pytest.raises(DataError):
        ClassicalMeanInterval().fit(y + 1.0)
    # column vectors are accepted
    assert ClassicalMeanInterval().fit(y.reshape(-1, 1)).n_paired_ == y.size
