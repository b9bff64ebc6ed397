import subprocess
import sys

import pytest

from gratingtd.cli import main
from gratingtd.fileio import read_snapshot

from conftest import CONFIGS

QUICK = str(CONFIGS / "quick_check.ini")


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_config_error_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[pulse]\ntheta = 0\n")
    assert main(["validate", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "bad.ini:2" in capsys.readouterr().err


def test_validation_error_exits_3(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[medium]\nkind = layered\nlayers = 0.25 0.5 1.0\n")
    assert main(["validate", "--config", str(bad), "--out", str(tmp_path)]) == 3
    assert "epsmu_below_freespace" in capsys.readouterr().err


def test_validate(tmp_path):
    assert main(["validate", "--config", QUICK, "--out", str(tmp_path), "--modes"]) == 0
    text = (tmp_path / "validate.txt").read_text()
    assert "invariants ok" in text and "constant C1" in text


def test_solve_sdomain(tmp_path):
    assert main(["solve-sdomain", "--config", QUICK, "--out", str(tmp_path), "--s", "0.4,5"]) == 0
    snap = read_snapshot(tmp_path / "sdomain_re.fld", expect=(16, 16, 1.0, 0.5, 0.0))
    assert snap.values.size == 16 * 17
    lines = (tmp_path / "sdomain.txt").read_text().splitlines()
    assert lines and all(" pass " in line for line in lines if line.startswith(("theorem", "lemma", "coerc")))


def test_simulate_outputs(tmp_path):
    assert main(["simulate", "--config", QUICK, "--out", str(tmp_path)]) == 0
    for name in ("energy.csv", "traces.csv", "summary.txt", "energy.png", "snapshots.png"):
        assert (tmp_path / name).exists()
    assert (tmp_path / "energy.csv").read_text().splitlines()[0] == "t,e1,e2"
    assert len(list(tmp_path.glob("snapshot_*.fld"))) == 2
    summary = (tmp_path / "summary.txt").read_text()
    assert "parseval pass" in summary and "causality pass" in summary


def test_check_quick(tmp_path):
    assert main(["check", "--config", QUICK, "--out", str(tmp_path), "--seed", "3"]) == 0
    lines = (tmp_path / "check_report.txt").read_text().splitlines()
    assert lines[0] == "seed 3" and all(" pass " in line for line in lines[1:])


def test_console_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "gratingtd.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "0.1.0" in out.stdout
