"""Message trembles separate the augmented and modified rules.

With a small tremble whose noise lands on one high message, the
replacement argument of the augmented rule breaks: the stray reward the
noise can deliver outweighs the zero bound.  The modified rule charges a
penalty for unsupported high messages, restoring a strict gap.  The
truthful intent stays an exact equilibrium on a signal structure whose
labels disagree with the state one percent of the time.
"""

from robustmech import run_experiment
from robustmech.numeric import fmt


def main():
    result = run_experiment("thm3")
    for name, value in sorted(result.certificates.items()):
        print(f"{'PASS' if value else 'FAIL'}  {name}")
    print()
    bad = [r for r in result.artifacts["asqr_witness"] if not r["ok"]]
    for row in bad:
        print("augmented rule failure: signal", row["signal"],
              "message", row["message"],
              "worst case", fmt(row["worst_case"]),
              "bound", fmt(row["bound"]))
    print("outcome distance to target under noise:",
          fmt(result.artifacts["equilibrium_max_tv"]))


if __name__ == "__main__":
    main()
