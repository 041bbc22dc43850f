"""Exact workbench for robust implementation with costly information
acquisition: mechanism builders, perturbed games, and equilibrium and
dominance verification by finite computation."""

from .core import (
    AgentPayoff,
    Lottery,
    ModelError,
    OutcomeSpace,
    ScenarioModel,
    SocialChoiceFunction,
    StateSpace,
    binary_trial_scenario,
    four_state_scenario,
    is_generic,
    is_nonconstant,
    make_scenario,
    three_state_scenario,
    tv_distance,
    zero_payoff,
)
from .engine import (
    Game,
    SignalStructure,
    TrembleSpec,
    canonical_replacement,
    expected_payoff,
    full_strategy_set,
    learning_cost_of,
    max_tv_to_target,
    mislabel_signals,
    outcome_distribution,
    pure_profile,
    restricted_strategy_set,
    revealing_signals,
    size_of_signal_structure,
    truthful_profile,
)
from .experiments import (
    ExperimentResult,
    check_strict_cyclical_monotonicity,
    deviation_dominance_certificate,
    list_experiments,
    run_experiment,
    separating_functional,
    synthesize_transfers,
)
from .equilibrium import (
    BRIterationResult,
    DominanceCertificate,
    EquilibriumReport,
    best_response,
    gamma_dominance_threshold,
    iterate_best_response,
    iterated_dominance,
    support_enumeration_nash,
    verify_equilibrium,
)
from .loader import ScenarioFileError, load_scenario, parse_scenario
from .mechanisms import (
    InfeasibleScheduleError,
    Mechanism,
    RewardSchedule,
    build_augmented_status_quo,
    build_maskin,
    build_modified_status_quo,
    build_one_respondent,
    build_status_quo,
    check_reward_constraints,
    export_mechanism,
    import_mechanism,
    solve_rewards,
)
from .perturbations import (
    BiasSpec,
    Perturbation,
    build_general_ladder,
    build_ladder,
    eta_of,
    is_c_bounded,
    posterior,
    simple_bias_ladder,
    unperturbed,
)

__version__ = "0.1.0"
