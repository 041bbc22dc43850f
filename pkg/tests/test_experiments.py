"""Named experiments: certificates, helper oracles, determinism."""

import random
from fractions import Fraction as F

import pytest

from robustmech import (
    ModelError,
    binary_trial_scenario,
    build_status_quo,
    check_strict_cyclical_monotonicity,
    list_experiments,
    run_experiment,
    separating_functional,
    synthesize_transfers,
    three_state_scenario,
)
from robustmech.core import AgentPayoff, Lottery, SocialChoiceFunction
from robustmech.experiments import (
    deviation_dominance_certificate,
    preferred_outcome_bias,
    random_generic_prior,
    random_scm_instance,
    step3_closure_certificate,
)


def test_experiment_registry():
    assert list_experiments() == [
        "maskin-contagion", "prop1", "prop2", "prop3", "thm1", "thm2", "thm3"
    ]
    with pytest.raises(ModelError):
        run_experiment("nope")


@pytest.mark.parametrize("name", ["thm1", "thm2", "prop2", "prop3"])
def test_experiments_pass(name):
    result = run_experiment(name)
    assert result.passed, dict(result.certificates)


def test_thm3_contrast():
    result = run_experiment("thm3")
    assert result.passed
    assert result.certificates["asqr_certificate_fails"]
    assert result.certificates["msqr_certificate"]
    assert result.certificates["msqr_truthful_equilibrium"]


def test_prop1_impossibility():
    result = run_experiment("prop1")
    assert result.passed
    assert result.certificates["not_both_passed"]


def test_contagion_fast_grid():
    result = run_experiment("maskin-contagion", depth=30, eta_grid=("1/10",))
    assert result.passed


def test_random_generic_prior():
    rng = random.Random(7)
    for n in (2, 3, 4):
        prior = random_generic_prior(rng, n)
        assert sum(prior) == 1
        assert prior[0] > max(prior[1:])


def test_preferred_outcome_bias_targets_the_modal_outcome():
    s = binary_trial_scenario()
    bias = preferred_outcome_bias(s, 1, F(10))
    # The second state's target is conviction; the override rewards it in
    # every state.
    assert bias == {(0, 1): F(10), (1, 1): F(10)}


def test_step3_closure_small():
    s = binary_trial_scenario()
    ok, failures = step3_closure_certificate(build_status_quo(s, 1), s, "sqr")
    assert ok and not failures


def test_separating_functional_binary():
    s = binary_trial_scenario()
    mech = build_status_quo(s, 1)
    sep = separating_functional(s.scf, mech)
    assert sep.values == (F(0), F(1))
    assert sep.margin == 1
    # Smallest integer scale with margin * C > 4 * (largest transfer).
    assert sep.scale == 4 * mech.transfer_bound + 1 == 45


def test_cyclical_monotonicity_oracles_agree():
    rng = random.Random(11)
    for _ in range(40):
        u, scf = random_scm_instance(rng)
        by_perm, _ = check_strict_cyclical_monotonicity(u, scf, method="permutation")
        by_cycle, _ = check_strict_cyclical_monotonicity(u, scf, method="cycle")
        assert by_perm == by_cycle


def test_cyclical_monotonicity_counterexample():
    # Two states whose targets swap but whose owner strictly prefers the
    # other state's target in both states: the swap permutation gains.
    u = AgentPayoff(((F(0), F(1)), (F(1), F(0))), F(0))
    scf = SocialChoiceFunction((Lottery.point(0, 2), Lottery.point(1, 2)))
    ok, witness = check_strict_cyclical_monotonicity(u, scf)
    assert not ok and witness


def test_synthesized_transfers_make_truth_strictly_best():
    s = three_state_scenario()
    u = s.payoffs[0]
    # Use a state-sensitive utility so the check is not vacuous.
    from robustmech.experiments import _default_prop3_scenario

    sc = _default_prop3_scenario()
    u = sc.payoffs[0]
    ok, _ = check_strict_cyclical_monotonicity(u, sc.scf)
    assert ok
    t = synthesize_transfers(u, sc.scf)
    assert min(t.values()) == 0
    for a in range(sc.n):
        for b in range(sc.n):
            if sc.scf(a).same_as(sc.scf(b)):
                continue
            own = u.expected_utility(a, sc.scf(a)) + t[a]
            cross = u.expected_utility(a, sc.scf(b)) + t[b]
            assert own > cross


def test_deviation_certificate_weak_vs_strict():
    from robustmech import build_augmented_status_quo, build_modified_status_quo
    from robustmech.engine import revealing_signals

    s = three_state_scenario()
    noise = {2: F(1)}
    rev = revealing_signals(s)
    asqr_ok, asqr_rows = deviation_dominance_certificate(
        build_augmented_status_quo(s), rev, F(1, 100), noise
    )
    msqr_ok, _ = deviation_dominance_certificate(
        build_modified_status_quo(s), rev, F(1, 100), noise
    )
    assert not asqr_ok
    assert msqr_ok
    # The failing comparison is driven by noise mass landing on the high
    # reward: worst case tau * R^2.
    bad = [r for r in asqr_rows if not r["ok"]]
    assert any(r["worst_case"] == F(1, 100) * 30 for r in bad)


def test_result_json_is_deterministic():
    a = run_experiment("thm1").to_json()
    b = run_experiment("thm1").to_json()
    assert a == b
    assert a.endswith("\n")


def test_grid_csv_shape():
    result = run_experiment("thm1")
    csv = result.grid_csv()
    lines = csv.strip().splitlines()
    assert len(lines) == len(result.artifacts["grid"]) + 1
    assert lines[0] == ",".join(sorted(result.artifacts["grid"][0]))
