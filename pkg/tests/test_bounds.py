import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from baec.bounds import (
    BoundFamily,
    asymmetric_bounds,
    bounds_for,
    crossover_draws,
    per_arm_gap,
    symmetric_bounds,
    symmetric_radius,
    t_delta_i,
    t_double_delta,
    worst_case_gap_bound,
)
from baec.core import ProblemSpec, ValidationError
from test_core import specs

SPEC = ProblemSpec(k=100, theta_l=0.1, theta_u=0.3, delta=0.01)


def test_asymmetric_pair_at_mean_half_n_100():
    # independent recomputation of both radicals
    n_cap = 856
    lower = 0.5 - math.sqrt(math.log(100 * n_cap / 0.01) / 200)
    upper = 0.5 + math.sqrt(math.log(n_cap / 0.01) / 200)
    b = asymmetric_bounds(0.5, 100, SPEC.consts)
    assert b.lower == pytest.approx(lower, abs=1e-15)
    assert b.upper == pytest.approx(upper, abs=1e-15)


def test_asymmetric_width_decreases():
    widths = [asymmetric_bounds(0.5, n, SPEC.consts).width for n in (1, 10, 100, 10_000)]
    assert all(a > b for a, b in zip(widths, widths[1:]))
    assert widths[-1] < 0.1


@given(st.floats(0.0, 1.0), st.integers(1, 10**6), specs())
def test_asymmetry_ratio_is_one_to_alpha(mean, n, s):
    b = asymmetric_bounds(mean, n, s.consts)
    ratio = (b.upper - mean) / (mean - b.lower)
    assert abs(ratio - 1.0 / s.consts.alpha) <= 1e-9


def test_symmetric_half_width_at_n_1():
    assert symmetric_radius(1, 0.01, 100) == pytest.approx(math.sqrt(math.log(20000) / 2), rel=1e-15)


@given(st.floats(0.0, 1.0), st.integers(1, 10**6))
def test_symmetric_is_symmetric(mean, n):
    b = symmetric_bounds(mean, n, 0.01, 100)
    r = symmetric_radius(n, 0.01, 100)
    assert (b.lower, b.upper) == (mean - r, mean + r)


@given(specs(), st.integers(1, 5000))
def test_widths_strictly_decrease(s, n):
    for fam in BoundFamily:
        assert bounds_for(fam, 0.5, n + 1, s).width < bounds_for(fam, 0.5, n, s).width


@given(specs(k_max=1000))
def test_width_crossover(s):
    start = math.ceil(crossover_draws(s.consts))
    for n in range(max(start, 1), start + 200):
        assert bounds_for(BoundFamily.ASYMMETRIC, 0.5, n, s).width < bounds_for(BoundFamily.SYMMETRIC, 0.5, n, s).width


def test_n_zero_rejected():
    with pytest.raises(ValidationError):
        asymmetric_bounds(0.5, 0, SPEC.consts)
    with pytest.raises(ValidationError):
        symmetric_bounds(0.5, 0, 0.01, 100)


def test_family_parse():
    assert BoundFamily.parse("asym") is BoundFamily.ASYMMETRIC
    assert BoundFamily.parse("Symmetric") is BoundFamily.SYMMETRIC
    with pytest.raises(ValidationError):
        BoundFamily.parse("lil")


def test_boundary_arms_give_t_delta():
    assert t_delta_i(SPEC, SPEC.theta_u) == SPEC.consts.t_delta
    assert t_delta_i(SPEC, SPEC.theta_l) == SPEC.consts.t_delta


@pytest.mark.parametrize("pair", [(0.1, 0.3), (0.3, 0.5), (0.5, 0.7), (0.7, 0.9)])
@pytest.mark.parametrize("mu", [0.2, 0.4, 0.6, 0.8])
def test_t_delta_i_brute_force_over_table_grid(pair, mu):
    s = ProblemSpec(k=100, theta_l=pair[0], theta_u=pair[1], delta=0.01)
    theta = s.consts.theta
    gap = mu - pair[0] if mu >= theta else pair[1] - mu
    expected = math.ceil(2 / gap**2 * math.log(10 * s.consts.n_delta_cap / 0.01))
    assert per_arm_gap(s, mu) == pytest.approx(gap)
    assert t_delta_i(s, mu) == expected


def test_t_delta_i_rejects_out_of_range_mean():
    with pytest.raises(ValidationError):
        t_delta_i(SPEC, 1.5)


@given(specs(k_max=1000), st.floats(0.0, 1.0))
def test_per_arm_gap_is_positive(s, mu):
    # theta lies strictly inside the gray zone, so neither branch can reach zero
    assert per_arm_gap(s, mu) > 0.0


@pytest.mark.parametrize("delta, gap", [(0.01, 352.7), (0.001, 343.4)])
def test_gap_bound_anchor_values(delta, gap):
    assert round(worst_case_gap_bound(ProblemSpec(k=100, theta_l=0.1, theta_u=0.3, delta=delta)), 1) == gap


def test_t_double_delta_oracle():
    ref = oracles.constants(100, 0.1, 0.3, 0.01)
    assert t_double_delta(SPEC) == ref["t_double"] == 1087


@given(specs(k_max=1000))
def test_t_double_gap_inequality(s):
    assert t_double_delta(s) - s.consts.t_delta >= math.floor(worst_case_gap_bound(s))


@given(specs(k_max=1000))
def test_stopping_fires_by_t_delta_for_every_mean(s):
    c = s.consts
    means = np.linspace(0.0, 1.0, 1001)
    lo, up = bounds_for(BoundFamily.ASYMMETRIC, 0.0, c.t_delta, s)
    r_lo, r_up = -lo, up
    fired = (means - r_lo >= s.theta_l) | (means + r_up < s.theta_u)
    assert fired.all()


@given(specs(k_max=1000))
def test_nothing_fires_before_n_floor(s):
    c = s.consts
    means = np.linspace(0.0, 1.0, 1001)
    for n in range(1, c.n_delta_floor):
        lo, up = bounds_for(BoundFamily.ASYMMETRIC, 0.0, n, s)
        fired = (means + lo >= s.theta_l) | (means + up < s.theta_u)
        assert not fired.any()
