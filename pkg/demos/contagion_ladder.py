"""Unraveling on a circumstance ladder under the matching rule.

A single biased type at the bottom circumstance prefers the status quo
outcome no matter what.  Iterated strict dominance then walks up the
ladder: each type can no longer justify the non-status-quo report once
its neighbor below has abandoned it, so every type of both agents ends
up sending the status quo message.
"""

import argparse

from robustmech import run_experiment
from robustmech.numeric import fmt


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--depth", type=int, default=100, help="ladder length")
    parser.add_argument("--eta", nargs="*", default=["1/100", "1/20", "1/10"],
                        help="bottom-circumstance masses to sweep")
    args = parser.parse_args()

    result = run_experiment("maskin-contagion", depth=args.depth,
                            eta_grid=tuple(args.eta))
    print(f"{'eta':>8} {'rounds':>7} {'unique survivor':>16}")
    for row in result.artifacts["grid"]:
        print(f"{fmt(row['eta']):>8} {row['rounds']:>7} "
              f"{str(row['unique_always_status_quo']):>16}")
    print()
    print("overall:", "PASS" if result.passed else "FAIL")


if __name__ == "__main__":
    main()
