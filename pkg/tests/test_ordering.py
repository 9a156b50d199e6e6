import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from busyloss import ordering as o


def test_ecdf_examples():
    f = o.ecdf([3.0, 1.0, 2.0, 2.0])
    assert f(0.5) == 0.0
    assert f(1.0) == 0.25
    assert f(2.0) == 0.75
    assert f(10.0) == 1.0
    np.testing.assert_array_equal(f.jumps, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        o.ecdf([])


def test_dkw_epsilon():
    assert o.dkw_epsilon(100_000, 0.001) == pytest.approx(math.sqrt(math.log(2000) / 200_000))
    # quoted as roughly 0.00617; the formula gives 0.0061648
    assert o.dkw_epsilon(100_000, 0.001) == pytest.approx(0.00617, abs=1e-5)


def test_exponential_draws_inside_band():
    x = np.random.default_rng(5).exponential(size=100_000)
    excess, _ = o.check_against_cdf(x, lambda t: 1 - np.exp(-np.maximum(t, 0)), alpha=0.001)
    assert excess < 0


def test_sample_rejects_nonfinite_and_is_read_only():
    with pytest.raises(ValueError):
        o.EmpiricalSample(np.array([1.0, np.nan]))
    s = o.EmpiricalSample([1, 2, 3], "x")
    with pytest.raises(ValueError):
        s.values[0] = 5


def test_reflexive():
    x = np.random.default_rng(0).exponential(size=10_000)
    assert o.check_dominance(x, x, ">=").consistent
    assert o.check_dominance(x, x, "<=").consistent


def test_shift_detected():
    rng = np.random.default_rng(1)
    x = rng.exponential(size=100_000)
    y = x + 0.05
    assert o.check_dominance(y, x, ">=").consistent
    v = o.check_dominance(y, x, "<=")
    assert not v.consistent and v.max_violation > 0
    assert v.decision == "violated"


def test_antisymmetry_of_strict_shift():
    rng = np.random.default_rng(2)
    x, y = rng.normal(size=50_000), rng.normal(size=50_000) + 0.2
    ge = o.check_dominance(y, x, ">=")
    le = o.check_dominance(y, x, "<=")
    assert ge.consistent != le.consistent


def test_same_law_independent_samples_consistent_both_ways():
    rng = np.random.default_rng(3)
    x, y = rng.geometric(0.4, 100_000), rng.geometric(0.4, 100_000)
    assert o.check_dominance(x, y, ">=").consistent and o.check_dominance(x, y, "<=").consistent


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(0.1, 10.0), shift=st.floats(-5.0, 5.0))
def test_invariant_under_increasing_transform(seed, scale, shift):
    rng = np.random.default_rng(seed)
    x, y = rng.exponential(size=2000), rng.exponential(size=2000) * 1.3
    v1 = o.check_dominance(y, x, ">=")
    v2 = o.check_dominance(y * scale + shift, x * scale + shift, ">=")
    assert v1.decision == v2.decision
    assert v1.max_violation == pytest.approx(v2.max_violation, abs=1e-12)


def test_verdict_fields():
    v = o.check_dominance(o.EmpiricalSample([1, 2, 3], "L"), o.EmpiricalSample([0, 1], "X"), ">=", alpha=0.05)
    assert v.eps_left == pytest.approx(o.dkw_epsilon(3, 0.05))
    assert v.band_width == pytest.approx(v.eps_left + v.eps_right)
    assert v.claim_text() == "L >=_st X"
    assert set(v.as_dict()) >= {"direction", "decision", "max_violation", "worst_point"}
    with pytest.raises(ValueError):
        o.check_dominance([1], [2], "==")


def test_check_against_cdf_handles_atoms():
    # a point mass at 1 must sit exactly on the band centre
    excess, point = o.check_against_cdf(np.ones(1000), lambda x: (np.asarray(x) >= 1).astype(float))
    assert excess == pytest.approx(-o.dkw_epsilon(1000))
    assert point == 1.0
    excess, _ = o.check_against_cdf(np.ones(1000), lambda x: (np.asarray(x) >= 2).astype(float))
    assert excess > 0


def test_mean_ci_examples():
    m, hw = o.mean_ci([1.0, 2.0, 3.0, 4.0], alpha=0.05)
    assert m == 2.5
    assert hw == pytest.approx(1.959963984540054 * math.sqrt(5 / 3) / 2)
    assert o.standard_error([1.0, 2.0, 3.0, 4.0]) == pytest.approx(math.sqrt(5 / 3) / 2)
    with pytest.raises(ValueError):
        o.mean_ci([1.0])


def test_mean_ci_coverage():
    rng = np.random.default_rng(4)
    hits = 0
    for _ in range(400):
        m, hw = o.mean_ci(rng.exponential(size=200), 0.05)
        hits += abs(m - 1.0) <= hw
    assert 0.90 < hits / 400 <= 1.0
