import json
import subprocess
import sys

import pytest

from whiskered import cli


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_check_model(cfg_file, capsys):
    assert run("check-model", "--model", cfg_file) == 0
    out = capsys.readouterr().out
    assert "max |Df^T J Df - lambda J|" in out and "exact torus" in out


def test_solve_writes_quadratic_log(cfg_file, tmp_path):
    out = tmp_path / "run.json"
    assert run("solve", "--model", cfg_file, "--eps", "0.05", "--modes", 128, "--tol", "1e-11", "--out", out) == 0
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == cli.SCHEMA_VERSION and doc["command"] == "solve"
    e = doc["result"]["errors"]
    assert e[-1] <= 1e-11 and len(e) <= 7
    assert all(b <= max(a ** 1.7, 1e-11) for a, b in zip(e, e[1:]))
    assert doc["config"]["solver"]["n_modes"] == 128
    assert doc["result"]["report"]["green"] is True


def test_deterministic_bytes_and_metadata(cfg_file, tmp_path):
    a, b, m = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "meta.json"
    for out in (a, b):
        assert run("solve", "--model", cfg_file, "--eps", "0.03", "--modes", 64, "--out", out, "--metadata", m) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "elapsed" not in a.read_text()
    assert "elapsed_seconds" in json.loads(m.read_text())


def test_missing_model_is_usage_error(capsys):
    with pytest.raises(SystemExit) as ei:
        run("solve", "--eps", "0.05")
    assert ei.value.code == 64
    assert "--model" in capsys.readouterr().err


def test_console_script_exit_code():
    p = subprocess.run([sys.executable, "-m", "whiskered.cli", "domain"], capture_output=True, text=True)
    assert p.returncode == 64


def test_bad_number_is_usage_error(cfg_file):
    with pytest.raises(SystemExit) as ei:
        run("solve", "--model", cfg_file, "--eps", "abc")
    assert ei.value.code == 64


def test_config_error(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text("[model]\nkappa = \"x\"\n")
    assert run("solve", "--model", p, "--eps", "0.1") == 64
    assert "line 2" in capsys.readouterr().err


def test_rejection_exit_2(tmp_path, capsys):
    p = tmp_path / "c.toml"
    p.write_text("[solver]\nn_modes = 64\nmax_iter = 1\n")
    assert run("solve", "--model", p, "--eps", "0.05", "--out", tmp_path / "r.json") == 2
    assert "NonConvergenceError" in capsys.readouterr().err
    assert json.loads((tmp_path / "r.json").read_text())["result"]["rejected"] is True


def test_internal_error_exit_1(cfg_file, monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("boom")
    monkeypatch.setattr(cli, "run_kam_iteration", boom)
    assert run("solve", "--model", cfg_file, "--eps", "0.05") == 1


def test_continue_breakdown(cfg_file, tmp_path):
    out = tmp_path / "c.json"
    code = run("continue", "--model", cfg_file, "--eps-end", "1.0", "--step", "0.1", "--modes", 64, "--out", out)
    res = json.loads(out.read_text())["result"]
    assert code == 2 and res["breakdown"] is True and res["points"]


def test_continue_ok(cfg_file, tmp_path):
    out = tmp_path / "c.json"
    assert run("continue", "--model", cfg_file, "--eps-end", "0.02", "--step", "0.01", "--modes", 64, "--out", out) == 0
    assert len(json.loads(out.read_text())["result"]["points"]) == 3


def test_lindstedt(cfg_file, tmp_path):
    out = tmp_path / "l.json"
    assert run("lindstedt", "--model", cfg_file, "--order-N", 4, "--modes", 32, "--eps-table", 0.01, 0.1,
               "--out", out) == 0
    res = json.loads(out.read_text())["result"]
    assert res["expansion"]["order_N"] == 4 and len(res["residual_table"]) == 2
    t = res["residual_table"]
    assert t[0]["residual_series"] < t[1]["residual_series"]


def test_domain_csv(tmp_path):
    cfg = tmp_path / "d.toml"
    cfg.write_text('[model]\nlambda_kind = "power"\n')
    out = tmp_path / "d.csv"
    assert run("domain", "--model", cfg, "--grid", 4, "--r0", 0.05, "--workers", 1, "--out", out) == 0
    rows = out.read_text().strip().split("\n")
    assert rows[0].startswith("index,re_eps") and len(rows) == 1 + 4


def test_rates(cfg_file, tmp_path):
    out = tmp_path / "r.json"
    assert run("rates", "--model", cfg_file, "--out", out) == 0
    res = json.loads(out.read_text())["result"]
    assert res["pairing_defect"] <= 1e-10 and res["trichotomy"] is True
