"""Command line interface behavior and exit codes."""

import json
from pathlib import Path

import pytest

from robustmech import import_mechanism
from robustmech.cli import main

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_experiment_list(capsys):
    code, out, _ = run(capsys, "experiment", "list")
    assert code == 0
    assert out.split() == [
        "maskin-contagion", "prop1", "prop2", "prop3", "thm1", "thm2", "thm3"
    ]


def test_mechanism_build_stdout(capsys):
    code, out, _ = run(capsys, "mechanism", "build", "--kind", "sqr")
    assert code == 0
    assert out.startswith("m1\tm2\toutcome\tt1\tt2")
    # The table round-trips through the importer.
    table = out.rsplit("\n", 2)[0] + "\n"
    mech = import_mechanism(table)
    assert mech.messages == ((1, 2), (1, 2))


def test_mechanism_build_to_file(tmp_path, capsys):
    target = tmp_path / "mech.tsv"
    code, out, _ = run(capsys, "mechanism", "build", "--kind", "asqr", "--out", str(target))
    assert code == 0
    mech = import_mechanism(target.read_text())
    assert mech.messages == ((-2, 1, 2), (-2, 1, 2))


def test_equilibrium_check(capsys):
    code, out, _ = run(
        capsys, "equilibrium", "check", "--kind", "sqr",
        "--scenario", str(SCENARIOS / "binary_trial.yaml"),
    )
    assert code == 0
    record = json.loads(out.strip().splitlines()[-1])
    assert record["is_equilibrium"] is True
    assert record["max_residual"] == "0"


def test_equilibrium_br_iterate(capsys):
    code, out, _ = run(capsys, "equilibrium", "br-iterate", "--kind", "sqr")
    assert code == 0
    record = json.loads(out.strip().splitlines()[-1])
    assert record["converged"] is True


def test_dominance_gamma(capsys):
    code, out, _ = run(capsys, "dominance", "gamma", "--kind", "sqr")
    assert code == 0
    record = json.loads(out.strip().splitlines()[-1])
    assert record["gamma"] == "19/42"
    assert record["below_half"] is True


def test_dominance_eliminate(capsys):
    code, out, _ = run(capsys, "dominance", "eliminate", "--kind", "sqr", "--full")
    assert code == 0
    record = json.loads(out.strip().splitlines()[-1])
    assert record["rounds"] >= 1


def test_experiment_run_writes_artifacts(tmp_path, capsys):
    code, out, _ = run(
        capsys, "experiment", "run", "maskin-contagion",
        "--eta-grid", "1/10", "--out", str(tmp_path),
    )
    assert code == 0
    assert "PASS" in out and "FAIL" not in out
    record = json.loads((tmp_path / "maskin-contagion.json").read_text())
    assert record["passed"] is True
    assert (tmp_path / "maskin-contagion.csv").exists()


def test_experiment_run_unknown_name(capsys):
    code, _, err = run(capsys, "experiment", "run", "nope")
    assert code == 2
    assert "unknown experiment" in err


def test_bad_scenario_path(capsys):
    with pytest.raises(FileNotFoundError):
        main(["equilibrium", "check", "--scenario", "/no/such/file.yaml"])
