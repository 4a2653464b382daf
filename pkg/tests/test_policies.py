import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from baec.core import ArmState, ValidationError
from baec.policies import PolicyContext, PolicyKind, index_apt_p, index_lucb, index_ucb, select_arm

THETA = 0.2085


def ctx(t=1, k=100, delta=0.01):
    return PolicyContext(global_time=t, theta=THETA, k=k, delta=delta)


def test_apt_p_undrawn_is_zero():
    assert index_apt_p(ctx(), ArmState.initial(THETA)) == 0.0


def test_apt_p_arithmetic():
    assert index_apt_p(ctx(), ArmState(4, THETA + 0.1)) == pytest.approx(0.2)


def test_ucb_values():
    assert index_ucb(ctx(t=7), ArmState(0, THETA)) == math.inf
    assert index_ucb(ctx(t=1), ArmState(1, 0.5)) == 0.5
    assert index_ucb(ctx(t=100), ArmState(10, 0.3)) == pytest.approx(0.3 + math.sqrt(math.log(100) / 20), rel=1e-15)


def test_lucb_values():
    assert index_lucb(ctx(t=3), ArmState(5, 0.42)) == 0.42
    assert index_lucb(ctx(t=8), ArmState(0, 0.42)) == math.inf
    expected = math.sqrt(math.log(5 * 100 * 16 / (4 * 0.01)) / 2)
    assert index_lucb(ctx(t=2), ArmState(1, 0.0)) == pytest.approx(expected, rel=1e-15)


def test_context_rejects_round_zero():
    with pytest.raises(ValidationError):
        ctx(t=0)


def test_parse():
    assert PolicyKind.parse("APT_P") is PolicyKind.APT_P
    with pytest.raises(ValidationError):
        PolicyKind.parse("thompson")


@pytest.mark.parametrize("policy", list(PolicyKind))
def test_all_undrawn_picks_first_arm(policy):
    arms = [ArmState.initial(THETA) for _ in range(5)]
    assert select_arm(policy, ctx(), arms) == 0


def test_inactive_arms_are_skipped():
    arms = [ArmState(3, 0.9, active=False), ArmState(3, 0.1), ArmState(3, 0.5)]
    assert select_arm(PolicyKind.APT_P, ctx(), arms) == 2


def test_ties_go_to_lowest_id():
    arms = [ArmState(3, 0.1), ArmState(2, 0.5), ArmState(2, 0.5)]
    assert select_arm(PolicyKind.UCB, ctx(t=8), arms) == 1


def test_no_active_arm_rejected():
    with pytest.raises(ValidationError):
        select_arm(PolicyKind.UCB, ctx(), [ArmState(1, 0.2, active=False)])


@given(
    st.lists(st.tuples(st.integers(0, 50), st.floats(0, 1)), min_size=1, max_size=8),
    st.integers(1, 10_000),
    st.sampled_from(list(PolicyKind)),
)
def test_indices_are_pure(arms, t, policy):
    states = [ArmState(n, m if n else THETA) for n, m in arms]
    first = select_arm(policy, ctx(t=t), states)
    assert first == select_arm(policy, ctx(t=t), states)
    assert states[first].active
