import json
import os
import subprocess
import sys

import pytest

from gofgamma import __version__
from gofgamma.cli import TestReport, fmt, main

SMALL_MC = ["--batches", "2", "--reps", "300"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def geiger_file(tmp_path):
    f = tmp_path / "geiger.txt"
    out = subprocess.run([sys.executable, "-m", "gofgamma", "fixtures", "geiger"],
                         capture_output=True, text=True, check=True).stdout
    f.write_text(out, encoding="utf-8")
    return f


def test_format():
    assert fmt(6.30075e-10) == "6.301e-10"
    assert fmt(0.0356) == "3.560e-02"


def test_geiger_spectral(capsys, geiger_file):
    code, out, _ = run(capsys, "test", str(geiger_file), "--alpha", "100", "--json")
    rep = TestReport.from_json(out)
    assert code == 0
    assert rep.decision == "fail_to_reject"
    assert rep.method == "spectral" and rep.m == 1
    assert rep.statistic == pytest.approx(6.301e-10, rel=5e-3)
    assert rep.critical_value == pytest.approx(2.582e-5, rel=1e-3)
    assert rep.library_version == __version__


def test_text_output(capsys):
    code, out, _ = run(capsys, "test", "fixture:geiger", "--alpha", "100")
    assert code == 0
    assert "6.301e-10" in out and "2.582e-05" in out and "fail_to_reject" in out


def test_tractor_exponential_rejected(capsys):
    code, out, _ = run(capsys, "test", "fixture:tractor", "--alpha", "1", "--method", "mc",
                       "--json", *SMALL_MC)
    rep = json.loads(out)
    assert code == 1
    assert rep["decision"] == "reject"
    assert rep["p_value"] == 0.0
    assert rep["protocol"]["batches"] == 2


def test_report_roundtrip_and_invariants():
    rep = TestReport(2.3, 107, 0.0046, "mc", None, 0.0362, 0.5, "fail_to_reject",
                     seed=5, protocol={"batches": 10})
    assert TestReport.from_json(rep.to_json()) == rep
    with pytest.raises(ValueError):
        TestReport(1.0, 5, 0.5, "mc", None, 0.1, 0.01, "fail_to_reject")
    with pytest.raises(ValueError):
        TestReport(1.0, 5, 0.05, "mc", None, 0.1, 1.5, "fail_to_reject")


def test_seed_precedence(capsys, monkeypatch):
    monkeypatch.setenv("GOFGAMMA_SEED", "77")
    _, out, _ = run(capsys, "test", "fixture:geiger", "--alpha", "100", "--method", "mc",
                    "--json", *SMALL_MC)
    assert json.loads(out)["seed"] == 77
    _, out, _ = run(capsys, "test", "fixture:geiger", "--alpha", "100", "--method", "mc",
                    "--json", "--seed", "5", *SMALL_MC)
    assert json.loads(out)["seed"] == 5
    monkeypatch.delenv("GOFGAMMA_SEED")
    _, out, _ = run(capsys, "test", "fixture:geiger", "--alpha", "100", "--method", "mc",
                    "--json", *SMALL_MC)
    assert json.loads(out)["seed"] == 20240101


def test_usage_errors(capsys, tmp_path):
    code, _, err = run(capsys, "test", "fixture:geiger", "--alpha", "0.3")
    assert code == 2 and "nu >= -1/2" in err
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2\n3 -1\n")
    code, _, err = run(capsys, "test", str(bad), "--alpha", "1")
    assert code == 2 and "line 2, column 3" in err
    code, _, _ = run(capsys, "test", str(tmp_path / "none.txt"), "--alpha", "1")
    assert code == 2
    code, _, _ = run(capsys, "frobnicate")
    assert code == 2
    code, _, _ = run(capsys, "power", "--alpha", "1", "--n", "10", "--model", "bogus")
    assert code == 2


def test_tables(capsys):
    code, out, _ = run(capsys, "tables", "scree", "--eps", "1e-10", "--json")
    rows = json.loads(out)["rows"]
    assert code == 0
    assert [r["m"] for r in rows] == [15, 12, 10, 6, 4, 3, 2, 1]
    _, out, _ = run(capsys, "tables", "trace", "--alpha", "100", "--json")
    assert json.loads(out)["rows"][0]["trace_s"] == pytest.approx(6.721718e-6, rel=1e-6)
    _, out, _ = run(capsys, "tables", "eigen", "--alpha", "2.3", "--m", "3", "--json")
    row = json.loads(out)["rows"][0]
    assert len(row["deltas"]) == 3 and row["deltas"][0] > row["deltas"][1]
    _, out, _ = run(capsys, "tables", "scree")
    assert "0.5" in out and "15" in out


def test_simulate_null_json(capsys):
    code, out, _ = run(capsys, "simulate-null", "--alpha", "2.3", "--n", "20", "--json",
                       *SMALL_MC)
    d = json.loads(out)
    assert code == 0
    assert {"alpha", "n", "level", "protocol", "critical_value", "quantiles"} <= set(d)


def test_power_json(capsys):
    code, out, _ = run(capsys, "power", "--alpha", "1", "--n", "60", "--model", "weibull:2",
                       "--reps", "200", "--critical", "0.1377", "--json")
    d = json.loads(out)
    assert code == 0
    assert set(d) == {"model", "alpha", "n", "level", "critical", "rejection_rate", "seed"}
    assert 0.0 <= d["rejection_rate"] <= 1.0


def test_slope(capsys):
    code, out, _ = run(capsys, "slope", "--alpha", "2.3", "--theta", "0.1",
                       "--model", "shape_shift", "--json")
    d = json.loads(out)
    assert code == 0
    assert d["slope"] == pytest.approx(d["b2"] / d["delta_1"])
    assert d["warnings"]  # shape shift has int x h dP0 = 1


def test_fixtures_command(capsys):
    code, out, _ = run(capsys, "fixtures", "tractor", "--json")
    assert code == 0 and len(json.loads(out)["tractor"]) == 107


def test_stdin_and_console_script():
    env = {**os.environ, "GOFGAMMA_NUMBA": os.environ.get("GOFGAMMA_NUMBA", "1")}
    proc = subprocess.run([sys.executable, "-m", "gofgamma", "test", "-", "--alpha", "2",
                           "--json"], input="1 2 3 4 5\n", capture_output=True, text=True,
                          env=env)
    assert proc.returncode in (0, 1)
    assert json.loads(proc.stdout)["n"] == 5
