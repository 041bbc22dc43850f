"""Scenario YAML loading and validation errors."""

from fractions import Fraction as F
from pathlib import Path

import pytest

from robustmech import ScenarioFileError, binary_trial_scenario, load_scenario, parse_scenario
from robustmech.perturbations import eta_of

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

GOOD = """
states:
  - {name: innocent, prob: "7/10"}
  - {name: guilty, prob: "3/10"}
outcomes: [acquit, convict]
scf:
  innocent: {acquit: "1"}
  guilty: {convict: "1"}
agents:
  - cost: "1"
  - cost: "1"
"""


def test_load_binary_example_matches_builtin():
    loaded, pert = load_scenario(SCENARIOS / "binary_trial.yaml")
    built = binary_trial_scenario()
    assert pert is None
    assert loaded.prior == built.prior
    assert loaded.state_space.states == built.state_space.states
    assert all(loaded.scf(j).same_as(built.scf(j)) for j in range(2))
    assert loaded.payoffs[0].cost == 1


def test_load_ladder_example():
    scenario, pert = load_scenario(SCENARIOS / "binary_trial_ladder.yaml")
    assert pert is not None
    assert pert.size == 51
    assert eta_of(pert) == F(1, 100)
    # The biased circumstance overrides agent 1's payoff and cost.
    assert pert.cost(0, 0) == 0
    assert pert.utility(0, 0, 0, 0) == 1000
    assert pert.utility(0, 1, 0, 0) == scenario.payoffs[0].u[0][0]


def test_load_three_state_example():
    scenario, _ = load_scenario(SCENARIOS / "three_state.yaml")
    assert scenario.n == 3
    assert scenario.generic


def test_parse_good_text():
    scenario, pert = parse_scenario(GOOD)
    assert scenario.n == 2 and pert is None


def test_not_yaml():
    with pytest.raises(ScenarioFileError):
        parse_scenario("states: [unclosed")


def test_empty_document():
    with pytest.raises(ScenarioFileError):
        parse_scenario("")


def test_missing_scf_row_reports_line():
    text = GOOD.replace('  guilty: {convict: "1"}\n', "")
    with pytest.raises(ScenarioFileError) as err:
        parse_scenario(text)
    assert "guilty" in str(err.value)
    assert err.value.line is not None


def test_bad_probability():
    text = GOOD.replace('"3/10"', '"4/10"')
    with pytest.raises(ScenarioFileError):
        parse_scenario(text)


def test_unknown_outcome_in_scf():
    text = GOOD.replace("{convict: \"1\"}", "{banish: \"1\"}")
    with pytest.raises(ScenarioFileError) as err:
        parse_scenario(text)
    assert "banish" in str(err.value)


def test_agent_utility_overrides():
    text = GOOD.replace(
        '  - cost: "1"\n  - cost: "1"\n',
        '  - cost: "2"\n    u: {"guilty,convict": "5", "*,acquit": "1"}\n  - cost: "1"\n',
    )
    scenario, _ = parse_scenario(text)
    u = scenario.payoffs[0]
    assert u.cost == 2
    assert u.u[1][1] == 5
    assert u.u[0][0] == 1 and u.u[1][0] == 1


def test_exactly_two_agents():
    text = GOOD + '  - cost: "1"\n'
    with pytest.raises(ScenarioFileError):
        parse_scenario(text)
