"""Full implementation with a single informed respondent.

When the respondent's utility satisfies the strict cyclical inequality
on every state permutation, shortest-path potentials yield transfers
under which truthfully reporting the observed state is strictly best,
state by state.  Below a learning-cost threshold, exhaustive equilibrium
enumeration confirms that every equilibrium of the one-question
mechanism produces the target outcome: implementation holds in all
equilibria, not just one.
"""

from robustmech import run_experiment
from robustmech.numeric import fmt


def main():
    result = run_experiment("prop3")
    art = result.artifacts
    print("transfers:", {k: fmt(v) for k, v in sorted(art["transfers"].items())})
    print("learning margin:", fmt(art["learning_margin"]),
          " cost threshold:", fmt(art["threshold"]),
          " smallest pairwise margin:", fmt(art["pair_margin"]))
    print()
    for name, value in sorted(result.certificates.items()):
        print(f"{'PASS' if value else 'FAIL'}  {name}")


if __name__ == "__main__":
    main()
