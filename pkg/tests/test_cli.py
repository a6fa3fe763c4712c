import csv
import io
import subprocess
import sys

import pytest

from divrisk import analytics, risk
from divrisk.cli import CSV_HEADER, main, scenario
from divrisk.model import Diversification, ModelParams


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def parse_report(text):
    rows = {}
    for line in text.splitlines():
        key, value = line.split(None, 1)
        rows[key] = value.strip()
    return rows


def test_report_joint_floor():
    code, text = run(["report", "--s", "1", "--d", "0.25", "--r1", "0.5", "--r2", "0.5", "--alpha", "0.95"])
    assert code == 0
    assert float(parse_report(text)["p_joint"]) == 0.125


def test_report_undiversified_var():
    code, text = run(["report", "--s", "1", "--d", "0.25", "--r1", "0", "--r2", "0", "--alpha", "0.95"])
    assert code == 0
    assert float(parse_report(text)["var_1"]) == pytest.approx(0.2, abs=1e-15)


def test_report_shallow_support_rejected(capsys):
    code, _ = run(["report", "--s", "1", "--d", "0.6", "--r1", "0.5", "--r2", "0.5", "--alpha", "0.95"])
    assert code == 1
    assert "s >= 2d" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["report", "--r1", "1.5"],
    ["report", "--alpha", "1"],
    ["report", "--s", "abc"],
    ["report", "--bogus", "1"],
    ["frobnicate"],
    [],
])
def test_report_config_errors(argv, capsys):
    code, _ = run(argv)
    assert code == 1
    assert capsys.readouterr().err


def test_report_values_equal_library_calls():
    opts = dict(s=1.0, d=0.25, r1=0.3, r2=0.7, alpha=0.99)
    code, text = run(["report"] + [x for k, v in opts.items() for x in (f"--{k}", str(v))])
    rows = parse_report(text)
    params, div = ModelParams(1.0, 0.25), Diversification(0.3, 0.7)
    assert float(rows["p_joint"]) == analytics.joint_default_prob(params, div)
    assert float(rows["p_aggregate"]) == analytics.aggregate_default_prob(params, div)
    assert float(rows["var_sys"]) == risk.var_systemic(params, div, 0.99).value
    assert float(rows["es_2"]) == risk.expected_shortfall(params, 0.7, 0.99).value
    lib = scenario(dict(opts))
    for key in ("p_ind_1", "w", "cov", "var_1", "es_1"):
        assert float(rows[key]) == lib[key]


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.conf"
    cfg.write_text("# defaults\ns = 1\nd = 0.25\nr1 = 0.5\nr2 = 0.5\nalpha = 0.5\n")
    _, text = run(["report", "--config", str(cfg)])
    assert float(parse_report(text)["var_1"]) == pytest.approx(-0.25)
    _, text = run(["report", "--config", str(cfg), "--alpha", "0.95"])
    assert float(parse_report(text)["var_1"]) == pytest.approx(0.25 - 0.15811388300841897)


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.conf"
    bad.write_text("nonsense\n")
    assert run(["report", "--config", str(bad)])[0] == 1
    bad.write_text("colour = red\n")
    assert run(["report", "--config", str(bad)])[0] == 1
    assert run(["report", "--config", str(tmp_path / "missing.conf")])[0] == 1


# --- sweep ---------------------------------------------------------------------

def read_sweep(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_sweep_shape_and_header(tmp_path):
    out = tmp_path / "sweep.csv"
    code, _ = run(["sweep", "--s", "1", "--d", "0.25", "--alpha", "0.95", "--grid-step", "0.05", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    rows = read_sweep(out)
    assert len(rows) == 441
    # row-major: r1 outer, r2 inner
    assert [rows[i]["r2"] for i in range(3)] == ["0.0", "0.05", "0.1"]
    assert rows[21]["r1"] == "0.05"


def test_sweep_column_values(tmp_path):
    out = tmp_path / "sweep.csv"
    run(["sweep", "--grid-step", "0.05", "--out", str(out)])
    rows = read_sweep(out)
    diag = [r for r in rows if abs(float(r["r1"]) + float(r["r2"]) - 1) < 1e-12]
    best = min(diag, key=lambda r: float(r["p_joint"]))
    assert float(best["r1"]) == 0.5
    for r in rows:
        if r["r1"] == r["r2"]:
            assert float(r["p_aggregate"]) == pytest.approx(0.125, abs=1e-12)
        for key in ("p_ind_1", "p_ind_2", "p_joint", "p_aggregate"):
            assert 0.0 <= float(r[key]) <= 1.0
        assert r["skip_reason"] == ""


def test_sweep_round_trip_values(tmp_path):
    out = tmp_path / "sweep.csv"
    run(["sweep", "--grid-step", "0.25", "--out", str(out)])
    params = ModelParams(1.0, 0.25)
    for r in read_sweep(out):
        div = Diversification(float(r["r1"]), float(r["r2"]))
        assert float(r["p_joint"]) == analytics.joint_default_prob(params, div)
        assert float(r["es_1"]) == risk.expected_shortfall(params, div.r1, 0.95).value


def test_sweep_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    flags = ["sweep", "--s", "2", "--d", "0.3", "--alpha", "0.99", "--grid-step", "0.1"]
    run(flags + ["--out", str(a)])
    run(flags + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_sweep_skip_reason(tmp_path):
    out = tmp_path / "shallow.csv"
    code, _ = run(["sweep", "--d", "0.6", "--grid-step", "0.5", "--out", str(out)])
    assert code == 0
    rows = read_sweep(out)
    assert len(rows) == 9
    assert all("s >= 2d" in r["skip_reason"] and r["p_joint"] == "" for r in rows)


def test_sweep_bad_step_and_path(tmp_path):
    assert run(["sweep", "--grid-step", "0.3", "--out", str(tmp_path / "x.csv")])[0] == 1
    assert run(["sweep", "--out", str(tmp_path / "no" / "dir.csv")])[0] == 1


def test_sweep_to_stdout():
    code, text = run(["sweep", "--grid-step", "0.5"])
    assert code == 0
    assert len(text.splitlines()) == 10


# --- verify --------------------------------------------------------------------

def test_verify_guard_exit_code(capsys):
    code, _ = run(["verify", "--samples", "100", "--seed", "42"])
    assert code == 1
    assert "guard" in capsys.readouterr().err


def test_verify_small_run_passes():
    code, text = run(["verify", "--samples", "200000", "--seed", "42", "--grid-step", "0.25"])
    assert code == 0, text
    assert "INFO" in text and "printed outer-case" in text
    assert "FAIL" not in text


def test_verify_failure_exit_code(monkeypatch):
    from divrisk import verify

    def broken(cfg):
        return verify.Check("broken", False, "forced")

    monkeypatch.setattr(verify, "CHECKS", [broken])
    code, text = run(["verify", "--samples", "10000"])
    assert code == 2
    assert "FAIL" in text


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "divrisk", "report", "--r1", "0.5", "--r2", "0.5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "p_joint" in proc.stdout
