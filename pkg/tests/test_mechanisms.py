"""Mechanism builders: tables, reward schedules, export round trips."""

from fractions import Fraction as F

import pytest

from robustmech import (
    InfeasibleScheduleError,
    Lottery,
    ModelError,
    binary_trial_scenario,
    build_augmented_status_quo,
    build_maskin,
    build_modified_status_quo,
    build_one_respondent,
    build_status_quo,
    check_reward_constraints,
    export_mechanism,
    import_mechanism,
    make_scenario,
    solve_rewards,
    three_state_scenario,
)
from robustmech.mechanisms import RewardSchedule, augmented_messages


def test_matching_rule_table():
    s = binary_trial_scenario()
    m = build_maskin(s, F(2))
    assert m.messages == ((1, 2), (1, 2))
    for j in (1, 2):
        assert m.g(j, j).same_as(s.scf(j - 1))
        assert m.t(0, j, j) == 2 and m.t(1, j, j) == 2
    mid = Lottery((F(1, 2), F(1, 2)))
    assert m.g(1, 2).same_as(mid) and m.g(2, 1).same_as(mid)
    assert m.t(0, 1, 2) == 0 and m.t(1, 2, 1) == 0


def test_matching_rule_validation():
    with pytest.raises(ModelError):
        build_maskin(binary_trial_scenario(), F(0))
    with pytest.raises(ModelError):
        build_maskin(three_state_scenario(), F(1))


def test_solved_schedules_are_the_frozen_minima():
    b = binary_trial_scenario()
    t = three_state_scenario()
    assert solve_rewards(b.prior, 1, "sqr").rewards == {1: F(3), 2: F(11)}
    assert solve_rewards(b.prior, 1, "asqr").rewards == {0: F(11), 1: F(15), 2: F(23)}
    ms = solve_rewards(b.prior, 1, "msqr")
    assert ms.rewards == {0: F(14), 1: F(21), 2: F(42)} and ms.penalty == 13
    assert solve_rewards(t.prior, 1, "sqr").rewards == {1: F(3), 2: F(12), 3: F(18)}
    assert solve_rewards(t.prior, 1, "asqr").rewards == {
        0: F(16), 1: F(21), 2: F(30), 3: F(36)
    }
    ms3 = solve_rewards(t.prior, 1, "msqr")
    assert ms3.rewards == {0: F(15), 1: F(23), 2: F(46), 3: F(52)} and ms3.penalty == 14


@pytest.mark.parametrize("kind", ["sqr", "asqr", "msqr"])
@pytest.mark.parametrize("scenario", [binary_trial_scenario(), three_state_scenario()])
def test_solved_schedules_satisfy_all_strict_constraints(kind, scenario):
    sched = solve_rewards(scenario.prior, scenario.max_cost, kind)
    for c in check_reward_constraints(sched, scenario.prior, scenario.max_cost, kind):
        assert c.ok, c.name


def test_ratio_constraints_need_a_unique_modal_state():
    uniform = (F(1, 2), F(1, 2))
    for kind in ("asqr", "msqr"):
        with pytest.raises(InfeasibleScheduleError):
            solve_rewards(uniform, 1, kind)
    # The base rule has no ratio constraint, so it stays feasible.
    assert solve_rewards(uniform, 1, "sqr").rewards[1] > 0


def test_status_quo_table_against_direct_rule():
    s = three_state_scenario()
    m = build_status_quo(s, 1)
    R = m.schedule.rewards
    for a in m.messages[0]:
        for b in m.messages[1]:
            want_outcome = s.scf(a - 1) if a == b else s.scf(0)
            want_t = R[a] if a == b else F(0)
            assert m.g(a, b).same_as(want_outcome)
            assert m.t(0, a, b) == want_t
            assert m.t(1, a, b) == want_t


def test_augmented_table_against_direct_rule():
    s = three_state_scenario()
    m = build_augmented_status_quo(s)
    R = m.schedule.rewards
    assert m.messages[0] == (-3, -2, 1, 2, 3)
    for a in m.messages[0]:
        for b in m.messages[1]:
            want_outcome = s.scf(abs(a) - 1) if abs(a) == abs(b) else s.scf(0)
            if a == b and a >= 1:
                want_t = R[a]
            elif a <= 1 and b <= 1 and (a, b) != (1, 1):
                want_t = R[0]
            else:
                want_t = F(0)
            assert m.g(a, b).same_as(want_outcome)
            assert m.t(0, a, b) == want_t
            # Transfers are symmetric across agents under this rule.
            assert m.t(1, b, a) == want_t


def test_modified_table_against_direct_rule():
    s = three_state_scenario()
    m = build_modified_status_quo(s)
    R, x = m.schedule.rewards, m.schedule.penalty
    for a in m.messages[0]:
        for b in m.messages[1]:
            if a == b and a >= 1:
                want_t = R[a]
            elif a <= 1 and (a, b) != (1, 1):
                want_t = R[0]
            elif a >= 2 and b <= 1:
                want_t = R[0] - x
            else:
                want_t = F(0)
            assert m.t(0, a, b) == want_t
            assert m.t(1, b, a) == want_t


def test_modified_rule_is_asymmetric_per_pair():
    m = build_modified_status_quo(binary_trial_scenario())
    R, x = m.schedule.rewards, m.schedule.penalty
    assert m.t(0, 2, 1) == R[0] - x
    assert m.t(1, 2, 1) == R[0]


def test_augmented_messages():
    assert augmented_messages(2) == (-2, 1, 2)
    assert augmented_messages(4) == (-4, -3, -2, 1, 2, 3, 4)


def test_custom_schedule_is_validated():
    s = binary_trial_scenario()
    bad = RewardSchedule("sqr", {1: F(3), 2: F(4)}, cost=F(1))
    with pytest.raises(InfeasibleScheduleError):
        build_status_quo(s, 1, schedule=bad)
    # Validation can be skipped deliberately, e.g. to study failures.
    m = build_status_quo(s, 1, schedule=bad, validate=False)
    assert m.t(0, 2, 2) == 4


def test_cost_bound_must_cover_scenario_costs():
    s = binary_trial_scenario()
    with pytest.raises(ModelError):
        build_status_quo(s, F(1, 2))


def test_export_import_round_trip():
    for build in (build_status_quo, build_augmented_status_quo, build_modified_status_quo):
        s = binary_trial_scenario()
        m = build(s, 1) if build is build_status_quo else build(s)
        again = import_mechanism(export_mechanism(m))
        assert again.messages == m.messages
        for pair in m.outcome:
            assert again.g(*pair).same_as(m.g(*pair))
            assert again.transfer[pair] == m.transfer[pair]


def test_transfer_bound():
    m = build_status_quo(binary_trial_scenario(), 1)
    assert m.transfer_bound == 11


def test_one_respondent_mechanism():
    s = three_state_scenario()
    pay = {1: F(0), 2: F(1), 3: F(2)}
    m = build_one_respondent(s, 0, pay)
    assert m.messages == ((1, 2, 3), (1,))
    for a in (1, 2, 3):
        assert m.g(a, 1).same_as(s.scf(a - 1))
        assert m.t(0, a, 1) == pay[a]
        assert m.t(1, a, 1) == 0
