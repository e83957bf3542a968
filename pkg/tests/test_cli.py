import json
import math
import subprocess
import sys

import pytest

from hdphase.cli import main
from hdphase.gaussian_extremes import max_critical_exact
from hdphase.runner import read_csv, read_json


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_critval(capsys):
    code, out, _ = run(capsys, "critval", "--d", "1000", "--alpha", "0.05")
    assert code == 0
    doc = json.loads(out)
    assert doc["value"] == max_critical_exact(1000, 0.05).value
    assert doc["method"] == "exact"


def test_critval_asymptotic_two_sided(capsys):
    code, out, _ = run(capsys, "critval", "--d", "1000", "--alpha", "0.05", "--two-sided", "--asymptotic")
    doc = json.loads(out)
    assert code == 0 and doc["statistic"] == "two-sided-max" and "a" in doc


def test_moments(capsys):
    code, out, _ = run(capsys, "moments", "--m", "3")
    doc = json.loads(out)
    assert code == 0 and abs(doc["deviation"]) < 1e-6 and doc["expected"] == 7


def test_sample_stdout_and_file(capsys, tmp_path):
    code, out, _ = run(capsys, "sample", "--m", "4", "--count", "25", "--seed", "3")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 25
    target = tmp_path / "draws.txt"
    run(capsys, "sample", "--m", "4", "--count", "25", "--seed", "3", "--out", str(target))
    assert target.read_text().splitlines() == lines
    assert all(math.isfinite(float(x)) for x in lines)


def test_size(capsys):
    code, out, _ = run(capsys, "size", "--m", "2.5", "--n", "20", "--d", "40", "--alpha", "0.05",
                       "--reps", "2000", "--seed", "9", "--estimator", "direct", "--threads", "2")
    row = json.loads(out)
    assert code == 0 and row["estimator"] == "direct" and 0 <= row["p_hat"] <= 1


def test_size_gaussian_two_sided(capsys):
    code, out, _ = run(capsys, "size", "--m", "3", "--n", "2", "--d", "40", "--alpha", "0.1",
                       "--reps", "2000", "--seed", "9", "--data", "gaussian", "--two-sided")
    row = json.loads(out)
    assert code == 0 and row["data_law"] == "standard-gaussian" and row["nagaev_bound"] is None


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "--m", "2.5", "--n", "100", "--d", "100000", "--alpha", "0.05")
    doc = json.loads(out)
    assert code == 0
    assert doc["nagaev_bound"] == pytest.approx(0.82257, abs=1e-4)
    assert doc["regime"] == "supercritical"
    assert doc["phase_threshold"] == pytest.approx(100 ** 0.25)


def test_bounds_outside_tail_region(capsys):
    code, out, _ = run(capsys, "bounds", "--m", "3", "--n", "1", "--d", "1", "--alpha", "0.5")
    doc = json.loads(out)
    assert code == 0 and doc["nagaev_bound"] is None and "sigma" in doc["nagaev_error"]


def test_sweep_outputs(capsys, tmp_path):
    cfg = tmp_path / "s.yaml"
    cfg.write_text("m: 4\nalpha: 0.05\nn_grid: [10]\ngrowth_rules: [[1, 0.5], [1, 1.5]]\nreps: 500\n")
    csv_path, json_path = tmp_path / "o.csv", tmp_path / "o.json"
    code, _, _ = run(capsys, "sweep", "--config", str(cfg), "--out-csv", str(csv_path),
                     "--out-json", str(json_path), "--threads", "2", "--seed", "5")
    assert code == 0
    assert len(read_csv(csv_path)) == 2
    result = read_json(json_path)
    assert result.spec.master_seed == 5 and result.ok


def test_sweep_stdout_and_failure_exit_code(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "s.yaml"
    cfg.write_text("m: 4\nalpha: 0.05\nn_grid: [10]\ngrowth_rules: [[1, 0.5]]\n"
                   "estimator: direct\nreps: 500\n")
    code, out, _ = run(capsys, "sweep", "--config", str(cfg))
    assert code == 0 and json.loads(out)["schema_version"] == 1
    monkeypatch.setenv("HDPHASE_DRAW_BUDGET", "10")
    code, _, err = run(capsys, "sweep", "--config", str(cfg))
    assert code == 1 and "failed" in err


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["passed"] and doc["sigma"] > 1


def test_selftest_text(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0 and "FAIL" not in out and out.count("PASS") >= 6


@pytest.mark.parametrize("argv", [
    ["critval", "--d", "0", "--alpha", "0.05"],
    ["critval", "--d", "10", "--alpha", "1.5"],
    ["moments", "--m", "1.5"],
    ["size", "--m", "3", "--n", "500", "--d", "500", "--alpha", "0.05", "--reps", "100000",
     "--seed", "1", "--estimator", "direct"],
])
def test_domain_errors_exit_2(capsys, monkeypatch, argv):
    monkeypatch.setenv("HDPHASE_DRAW_BUDGET", "1e6")
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hdphase", "critval", "--d", "10", "--alpha", "0.05"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["d"] == 10
