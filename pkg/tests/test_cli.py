import json

import numpy as np
import pytest

from shearloc import io
from shearloc.cli import EXIT_CONFIG, EXIT_OK, main
from shearloc.pipeline import read_orbit, write_orbit

PARAMS = '{"alpha": 1.572, "m": 0.02246, "n": 0.025, "lambda_frac": 0.5}'


def test_eigs_and_equilibria(capsys):
    assert main(["--params", PARAMS, "eigs", "--at", "M1"]) == EXIT_OK
    spec = json.loads(capsys.readouterr().out)
    assert spec["case_tag"] == "M1-case1" and len(spec["vectors"]) == 16
    assert main(["--params", PARAMS, "equilibria"]) == EXIT_OK
    eqs = json.loads(capsys.readouterr().out)
    assert [e["label"] for e in eqs[:2]] == ["M0", "M1"]


@pytest.mark.parametrize("argv", [
    ["eigs"],
    ["--params", '{"alpha": 1.572, "m": 0.02246, "n": 0.025}', "eigs"],
    ["--params", '{"alpha": 0.01, "m": 0.1, "n": 0.025, "lambda_frac": 0.5}', "eigs"],
    ["--params", PARAMS, "--tol-bc", "-1", "eigs"],
    ["--params", "{broken", "eigs"],
])
def test_config_errors_exit_4(argv, capsys):
    assert main(argv) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_missing_artifact_exit_4(tmp_path):
    assert main(["--params", PARAMS, "--out-dir", str(tmp_path), "profiles"]) == EXIT_CONFIG


def test_seed_stage(tmp_path):
    assert main(["--params", PARAMS, "--out-dir", str(tmp_path), "seed"]) == EXIT_OK
    assert io.validate_csv(tmp_path / "seed.csv", "orbit") == 801


@pytest.mark.slow
def test_downstream_stages(tmp_path, heteroclinic_runs, capsys):
    orbit = heteroclinic_runs[1]["final"].orbit
    write_orbit(tmp_path / "orbit.csv", orbit)
    back = read_orbit(tmp_path / "orbit.csv", orbit.params)
    np.testing.assert_array_equal(back.states, orbit.states)
    base = ["--params", PARAMS, "--out-dir", str(tmp_path)]
    assert main(base + ["profiles"]) == EXIT_OK
    assert main(base + ["snapshots", "--times", "0,1,10"]) == EXIT_OK
    for t in ("0", "1", "10"):
        assert io.validate_csv(tmp_path / f"snap_{t}.csv", "snapshot") == 401
    assert main(base + ["plots", "--times", "0,1,10"]) == EXIT_OK
    assert (tmp_path / "plot_sigma.gp").exists()
    capsys.readouterr()
    assert main(base + ["verify", "--orbit", "orbit.csv", "--profiles", "profiles.csv"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") == 12
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["pass"] is True


def test_plots_need_snapshots(tmp_path):
    assert main(["--params", PARAMS, "--out-dir", str(tmp_path), "plots"]) == EXIT_CONFIG
