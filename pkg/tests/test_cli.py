"""Command-line interface: argument handling, exit codes, artifacts."""

import json
import subprocess
import sys

import pytest

from intero.cli import build_parser, main

TINY_TOML = """\
[env]
kind = "costly_maze"
seed = 3
episodes = 1
episode_len = 20
rows = 3
cols = 5
wall_col = 2
doors = [[0, 2], [2, 2]]
start = [2, 0]
goal = [0, 4]
charger = [0, 0]
noise_levels = [-0.06, 0.0, 0.06]
init_v = [0.9]
probe_cost = 0.05

[bounds]
soft_lo = [0.3]
soft_hi = [1.6]
hard_lo = [0.0]
hard_hi = [2.0]
weight_lo = [0.3]
weight_hi = [0.4]
rho = [1.0]

[homeostat]
lambda_h = 1.0
tau_min = 0.08
tau_max = 0.3

[allostat]
horizon = 1
n_rollouts = 5
abstain_threshold = 8.0
risk_coeff = 0.05

[enact]
lambda_e = 2.0

[learner]
alpha = 0.2
gamma_task = 0.9
v_bins = 1
"""


@pytest.fixture(scope="module")
def config_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "tiny.toml"
    path.write_text(TINY_TOML)
    return path


def test_parser_requires_a_command(capsys):
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args([])
    assert exc.value.code == 2


def test_unknown_argument_rejected(config_path):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--config", str(config_path), "--frobnicate"])
    assert exc.value.code == 2


def test_run_subcommand(config_path, tmp_path, capsys):
    out = tmp_path / "run0"
    rc = main(["run", "--config", str(config_path), "--seed", "0",
               "--out", str(out)])
    assert rc == 0
    assert str(out) in capsys.readouterr().out
    for name in ("records.csv", "metrics.json", "config.json"):
        assert (out / name).exists()
    echo = json.loads((out / "config.json").read_text())
    assert echo["mask"] == "HAE" and echo["seed"] == 0


def test_run_mask_flag(config_path, tmp_path):
    out = tmp_path / "masked"
    rc = main(["run", "--config", str(config_path), "--seed", "1",
               "--out", str(out), "--mask", "H--"])
    assert rc == 0
    assert json.loads((out / "config.json").read_text())["mask"] == "H--"


def test_run_missing_config_exits_2(tmp_path, capsys):
    rc = main(["run", "--config", str(tmp_path / "nope.toml"), "--seed", "0",
               "--out", str(tmp_path / "x")])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_run_invalid_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text(TINY_TOML + "\n[telemetry]\nrate = 1\n")
    rc = main(["run", "--config", str(bad), "--seed", "0",
               "--out", str(tmp_path / "x")])
    assert rc == 2


def test_run_bad_mask_exits_1(config_path, tmp_path, capsys):
    rc = main(["run", "--config", str(config_path), "--seed", "0",
               "--out", str(tmp_path / "x"), "--mask", "HAEX"])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_ablate_then_report(config_path, tmp_path, capsys):
    ab = tmp_path / "ab"
    rc = main(["ablate", "--config", str(config_path), "--seeds", "2",
               "--out", str(ab)])
    assert rc == 0
    assert (ab / "summary.csv").exists() and (ab / "dominance.csv").exists()
    rc = main(["report", "--runs", str(ab)])
    assert rc == 0
    assert (ab / "report.md").exists()
    assert str(ab / "report.md") in capsys.readouterr().out


def test_report_missing_dir_exits_2(tmp_path, capsys):
    rc = main(["report", "--runs", str(tmp_path / "missing")])
    assert rc == 2
    assert "not a directory" in capsys.readouterr().err


def test_module_entry_point_help():
    proc = subprocess.run([sys.executable, "-m", "intero.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "run" in proc.stdout and "ablate" in proc.stdout and "report" in proc.stdout


def test_console_script_help():
    import shutil

    exe = shutil.which("intero")
    assert exe is not None, "console script 'intero' not installed"
    proc = subprocess.run([exe, "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "ablate" in proc.stdout
