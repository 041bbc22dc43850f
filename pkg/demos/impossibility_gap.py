"""Why bounded transfers cannot pin the outcome in every perturbation.

Builds two opposed payoff tilts from a functional that separates one
target lottery from the rest.  An exact inequality chain over the
transfer table shows that any play surviving one tilt hands the other
agent too much value under the opposite tilt, so no strategy profile on
the search grid implements the target under both.  The measured outcome
gap grows linearly in the perturbation mass.
"""

from robustmech import run_experiment
from robustmech.numeric import fmt


def main():
    result = run_experiment("prop1")
    art = result.artifacts
    print("separating values:", tuple(fmt(v) for v in art["separating_values"]))
    print("margin:", fmt(art["margin"]), " scale:", fmt(art["scale"]),
          " transfer bound:", fmt(art["transfer_bound"]))
    print("implements under + tilt:", art["implements_under_plus"])
    print("implements under - tilt:", art["implements_under_minus"])
    print()
    print(f"{'eta':>8} {'outcome gap >=':>15}")
    for row in art["grid"]:
        print(f"{fmt(row['eta']):>8} {fmt(row['tv_lower_bound']):>15}")
    print()
    for name, value in sorted(result.certificates.items()):
        print(f"{'PASS' if value else 'FAIL'}  {name}")


if __name__ == "__main__":
    main()
