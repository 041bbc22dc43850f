"""Print the transfer tables of every mechanism family side by side.

Shows how the three status-quo variants differ: the base rule rewards
only exact matches, the augmented rule adds negative messages that
coordinate on a base reward, and the modified rule charges a penalty for
sending a high message against a low one.
"""

import argparse

from robustmech import (
    binary_trial_scenario,
    build_augmented_status_quo,
    build_maskin,
    build_modified_status_quo,
    build_status_quo,
    export_mechanism,
    load_scenario,
    three_state_scenario,
)
from robustmech.numeric import fmt


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario", help="scenario YAML file")
    parser.add_argument("--states", type=int, default=2, choices=[2, 3],
                        help="built-in scenario to use when no file is given")
    args = parser.parse_args()

    if args.scenario:
        scenario, _ = load_scenario(args.scenario)
    else:
        scenario = binary_trial_scenario() if args.states == 2 else three_state_scenario()

    builders = [
        ("matching rule", lambda s: build_maskin(s, 1) if s.n == 2 else None),
        ("status quo rule", lambda s: build_status_quo(s, s.max_cost)),
        ("augmented rule", build_augmented_status_quo),
        ("modified rule", build_modified_status_quo),
    ]
    for label, build in builders:
        mech = build(scenario)
        if mech is None:
            continue
        print(f"== {label} ==")
        if mech.schedule:
            rewards = ", ".join(
                f"R{j}={fmt(r)}" for j, r in sorted(mech.schedule.rewards.items())
            )
            extra = f", x={fmt(mech.schedule.penalty)}" if mech.schedule.penalty else ""
            print(f"schedule: {rewards}{extra}")
        print(export_mechanism(mech))


if __name__ == "__main__":
    main()
