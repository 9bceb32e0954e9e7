import json
import subprocess
import sys

import pytest

from ofdma_cfo import cli
from ofdma_cfo.exceptions import SingularMatrixError

from test_harness import SMALL, write


def test_run(tmp_path, capsys):
    scn = write(tmp_path, SMALL)
    assert cli.main(["run", str(scn), "--out", str(tmp_path / "o"), "--seed", "4"]) == 0
    out = tmp_path / "o"
    assert (out / "ber.csv").read_text().startswith("snr_db,technique,bits,errors,ber\n")
    meta = json.loads((out / "result.meta").read_text())
    assert meta["seeds"]["master"] == 4 and meta["command"] == "run"
    assert "BER=" in capsys.readouterr().out


def test_run_workers_byte_identical(tmp_path):
    scn = write(tmp_path, SMALL)
    for w in ("1", "2"):
        assert cli.main(["run", str(scn), "--out", str(tmp_path / w), "--workers", w]) == 0
    assert (tmp_path / "1" / "ber.csv").read_bytes() == (tmp_path / "2" / "ber.csv").read_bytes()
    assert (tmp_path / "1" / "sinr.csv").read_bytes() == (tmp_path / "2" / "sinr.csv").read_bytes()


def test_heatmap(tmp_path, capsys):
    assert cli.main(["heatmap", "fig2.scn", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "heatmap_windowed.txt").exists() and (tmp_path / "heatmap_plain.txt").exists()
    assert "off-band" in capsys.readouterr().out


def test_complexity(tmp_path):
    assert cli.main(["complexity", "table1.scn", "--out", str(tmp_path)]) == 0
    assert "quasi_banded" in (tmp_path / "complexity.csv").read_text()


def test_sinr(tmp_path, capsys):
    text = SMALL.replace("snr_db = 10, 20", "snr_db = 25")
    assert cli.main(["sinr", str(write(tmp_path, text)), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "sinr.csv").exists()
    assert "gap" in capsys.readouterr().out


@pytest.mark.parametrize("args", [
    ["run", "/no/such.scn"],
    ["heatmap", "sec5.scn"],
    ["complexity", "fig2.scn"],
])
def test_invalid_scenario_exit_2(tmp_path, args, capsys):
    assert cli.main(args + ["--out", str(tmp_path)]) == 2
    assert capsys.readouterr().err


def test_bad_workers(tmp_path):
    assert cli.main(["run", "fig2.scn", "--workers", "0", "--out", str(tmp_path)]) == 2


def test_numerical_failure_exit_3(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise SingularMatrixError("pivot")
    monkeypatch.setattr(cli, "run_ber_experiment", boom)
    assert cli.main(["run", "fig2.scn", "--out", str(tmp_path)]) == 3


def test_console_script(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ofdma_cfo.cli", "complexity", "table1.scn",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    proc = subprocess.run([sys.executable, "-m", "ofdma_cfo.cli", "run", "missing.scn"],
                          capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 2
