"""Command line front end.

Subcommands mirror the library's main entry points: building mechanisms,
checking equilibria, computing dominance thresholds, running iterated
elimination, and executing named experiments.  Results print as JSON
records preceded by a short human-readable table.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .core import ModelError, binary_trial_scenario
from .engine import Game, full_strategy_set, restricted_strategy_set, truthful_profile
from .equilibrium import (
    gamma_dominance_threshold,
    iterate_best_response,
    iterated_dominance,
    verify_equilibrium,
)
from .experiments import _jsonable, list_experiments, run_experiment
from .loader import ScenarioFileError, load_scenario
from .mechanisms import (
    InfeasibleScheduleError,
    build_augmented_status_quo,
    build_maskin,
    build_modified_status_quo,
    build_status_quo,
    export_mechanism,
)
from .numeric import fmt, rat


def _load(args):
    if args.scenario:
        return load_scenario(args.scenario)
    return binary_trial_scenario(), None


def _build_mechanism(kind, scenario, args):
    if kind == "maskin":
        return build_maskin(scenario, rat(args.reward))
    if kind == "sqr":
        return build_status_quo(scenario, rat(args.c_bar) if args.c_bar else scenario.max_cost)
    if kind == "asqr":
        return build_augmented_status_quo(scenario)
    if kind == "msqr":
        return build_modified_status_quo(scenario)
    raise ModelError(f"unknown mechanism kind {kind!r}")


def _strategy_sets(kind, scenario):
    if kind == "maskin":
        full = full_strategy_set(tuple(range(1, scenario.n + 1)), scenario.n)
        return full, full
    variant = "sqr" if kind == "sqr" else "asqr"
    rs = restricted_strategy_set(variant, scenario.n)
    return rs, rs


def _emit(record):
    print(json.dumps(_jsonable(record), sort_keys=True))


def cmd_mechanism_build(args):
    scenario, _ = _load(args)
    mech = _build_mechanism(args.kind, scenario, args)
    table = export_mechanism(mech)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(table)
        print(f"wrote {args.out}")
    else:
        print(table, end="")
    if mech.schedule:
        _emit({"kind": mech.kind, "rewards": mech.schedule.rewards,
               "penalty": mech.schedule.penalty})
    return 0


def cmd_equilibrium_check(args):
    scenario, pert = _load(args)
    mech = _build_mechanism(args.kind, scenario, args)
    game = Game(scenario, mech, pert)
    sets = _strategy_sets(args.kind, scenario)
    report = verify_equilibrium(game, truthful_profile(game), sets, rat(args.epsilon))
    print(f"equilibrium: {report.is_equilibrium}   max residual: {fmt(report.max_residual)}"
          f"   max TV: {fmt(report.max_tv)}")
    _emit({
        "is_equilibrium": report.is_equilibrium,
        "max_residual": report.max_residual,
        "max_tv": report.max_tv,
        "truthful_mass": report.truthful_mass,
        "residuals": report.residuals,
    })
    return 0 if report.is_equilibrium else 1


def cmd_equilibrium_br(args):
    scenario, pert = _load(args)
    mech = _build_mechanism(args.kind, scenario, args)
    game = Game(scenario, mech, pert)
    sets = _strategy_sets(args.kind, scenario)
    result = iterate_best_response(game, sets, max_rounds=args.max_rounds)
    print(f"converged: {result.converged}  rounds: {result.rounds}  cycled: {result.cycled}")
    record = {"converged": result.converged, "rounds": result.rounds, "cycled": result.cycled}
    if result.report:
        record["truthful_mass"] = result.report.truthful_mass
        record["max_tv"] = result.report.max_tv
        record["is_equilibrium"] = result.report.is_equilibrium
    _emit(record)
    return 0 if result.converged else 1


def cmd_dominance_gamma(args):
    scenario, _ = _load(args)
    mech = _build_mechanism(args.kind, scenario, args)
    variant = "sqr" if args.kind == "sqr" else "asqr"
    rs = restricted_strategy_set(variant, scenario.n)
    c_bar = rat(args.c_bar) if args.c_bar else scenario.max_cost
    cert = gamma_dominance_threshold(mech, scenario, (rs, rs), c_bar)
    print(f"gamma* = {fmt(cert.gamma)}   below 1/2: {cert.below_half}")
    _emit({"gamma": cert.gamma, "below_half": cert.below_half,
           "witness": list(cert.witness)})
    return 0 if cert.below_half else 1


def cmd_dominance_eliminate(args):
    scenario, pert = _load(args)
    mech = _build_mechanism(args.kind, scenario, args)
    game = Game(scenario, mech, pert)
    if args.full:
        sets = (full_strategy_set(mech.messages[0], game.strategy_length(0)),
                full_strategy_set(mech.messages[1], game.strategy_length(1)))
    else:
        sets = _strategy_sets(args.kind, scenario)
    surviving, rounds = iterated_dominance(game, sets, args.mixture_denominator)
    counts = {f"agent{a + 1}": {t: len(pool) for t, pool in surviving[a].items()}
              for a in (0, 1)}
    print(f"rounds: {rounds}")
    _emit({"rounds": rounds, "surviving_counts": counts,
           "surviving": [{t: pool for t, pool in surviving[a].items()} for a in (0, 1)]})
    return 0


def cmd_experiment_run(args):
    scenario = None
    if args.scenario:
        scenario, _ = load_scenario(args.scenario)
    kwargs = {}
    if args.eta_grid:
        kwargs["eta_grid"] = tuple(args.eta_grid)
    result = run_experiment(args.name, scenario, **kwargs)
    for name, value in sorted(result.certificates.items()):
        print(f"{'PASS' if value else 'FAIL'}  {name}")
    payload = result.to_json()
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"{args.name}.json")
        with open(path, "w") as fh:
            fh.write(payload)
        csv = result.grid_csv()
        if csv:
            with open(os.path.join(args.out, f"{args.name}.csv"), "w") as fh:
                fh.write(csv)
        print(f"wrote {path}")
    else:
        print(payload, end="")
    return 0 if result.passed else 1


def cmd_experiment_list(args):
    for name in list_experiments():
        print(name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robustmech",
                                     description="Robust implementation workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, kinds=("maskin", "sqr", "asqr", "msqr")):
        p.add_argument("--scenario", help="scenario YAML file")
        p.add_argument("--kind", choices=kinds, default="sqr")
        p.add_argument("--c-bar", dest="c_bar", help="learning cost bound")
        p.add_argument("--reward", default="1", help="matching-rule reward")

    mech = sub.add_parser("mechanism", help="mechanism construction").add_subparsers(
        dest="sub", required=True)
    b = mech.add_parser("build", help="build and export a mechanism table")
    add_common(b)
    b.add_argument("--out", help="write the table to a file")
    b.set_defaults(func=cmd_mechanism_build)

    eq = sub.add_parser("equilibrium", help="equilibrium tools").add_subparsers(
        dest="sub", required=True)
    c = eq.add_parser("check", help="verify the truthful profile")
    add_common(c)
    c.add_argument("--epsilon", default="0")
    c.set_defaults(func=cmd_equilibrium_check)
    br = eq.add_parser("br-iterate", help="synchronous best-response iteration")
    add_common(br)
    br.add_argument("--max-rounds", type=int, default=200)
    br.set_defaults(func=cmd_equilibrium_br)

    dom = sub.add_parser("dominance", help="dominance tools").add_subparsers(
        dest="sub", required=True)
    g = dom.add_parser("gamma", help="dominance threshold for truth-telling")
    add_common(g, kinds=("sqr", "asqr", "msqr"))
    g.set_defaults(func=cmd_dominance_gamma)
    e = dom.add_parser("eliminate", help="iterated strict dominance")
    add_common(e)
    e.add_argument("--full", action="store_true", help="use the full strategy set")
    e.add_argument("--mixture-denominator", type=int, default=0)
    e.set_defaults(func=cmd_dominance_eliminate)

    exp = sub.add_parser("experiment", help="named reproductions").add_subparsers(
        dest="sub", required=True)
    r = exp.add_parser("run", help="run one named experiment")
    r.add_argument("name")
    r.add_argument("--scenario")
    r.add_argument("--eta-grid", nargs="*", help="eta values, e.g. 1/100 1/10")
    r.add_argument("--out", help="directory for JSON/CSV output")
    r.set_defaults(func=cmd_experiment_run)
    ls = exp.add_parser("list", help="list experiment names")
    ls.set_defaults(func=cmd_experiment_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ModelError, InfeasibleScheduleError, ScenarioFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
