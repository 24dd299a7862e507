import json
import os
import subprocess
import sys

import numpy as np
import pytest

from mallowslab.limits import limit_density
from mallowslab.qstats import pressure_limit


def _run(*args, env=None):
    cmd = [sys.executable, "-m", "mallowslab.cli", *args]
    merged = dict(os.environ)
    if env:
        merged.update(env)
    return subprocess.run(cmd, capture_output=True, text=True, env=merged)


def _rows(text):
    lines = text.strip().splitlines()
    return lines[0], [line.split(",") for line in lines[1:]]


def test_version_flag():
    out = _run("--version")
    assert out.returncode == 0
    assert out.stdout.strip() == "0.1.0"


def test_pressure_outputs():
    out = _run("pressure", "--beta", "0", "--n", "100")
    assert out.returncode == 0
    payload = json.loads(out.stdout)
    assert list(payload)[0] == "version"
    assert payload["pressure"] == 0.0
    assert payload["n"] == 100
    limit = _run("pressure", "--beta", "1.0")
    val = json.loads(limit.stdout)
    assert val["n"] == "limit"
    assert abs(val["pressure"] - pressure_limit(1.0).value) < 1e-12


def test_sample_rows_and_determinism():
    args = ("sample", "--n", "5", "--beta", "1.0", "--count", "3", "--seed", "7")
    first = _run(*args)
    assert first.returncode == 0
    header, rows = _rows(first.stdout)
    assert header == "sample_id,position,value"
    assert len(rows) == 15
    by_sample = {}
    for sid, pos, val in rows:
        by_sample.setdefault(sid, []).append(int(val))
    assert list(by_sample) == ["0", "1", "2"]
    for values in by_sample.values():
        assert sorted(values) == [1, 2, 3, 4, 5]
    second = _run(*args)
    assert second.stdout == first.stdout


def test_empirical_table(tmp_path):
    out = _run("empirical", "--n", "50", "--beta", "2.0", "--samples", "200",
               "--bins", "5", "--seed", "3")
    assert out.returncode == 0
    header, rows = _rows(out.stdout)
    assert header == "x_bin,y_bin,empirical_mass,limit_mass,abs_error"
    assert len(rows) == 25
    emp = sum(float(r[2]) for r in rows)
    lim = sum(float(r[3]) for r in rows)
    assert abs(emp - 1.0) < 1e-9
    assert abs(lim - 1.0) < 1e-9


def test_density_table_and_profile():
    out = _run("density", "--beta", "1.5", "--grid", "4")
    header, rows = _rows(out.stdout)
    assert header == "x,y,u"
    assert len(rows) == 16
    x, y, u = (float(v) for v in rows[5])
    assert abs(u - limit_density(x, y, 1.5)) < 1e-12
    prof = _run("density", "--beta", "1.5", "--grid", "4", "--profile")
    assert _rows(prof.stdout)[0] == "x,y,rho"


def test_density_figure(tmp_path):
    fig = tmp_path / "u.png"
    out = _run("density", "--beta", "1.0", "--grid", "24", "--fig", str(fig))
    assert out.returncode == 0
    assert fig.read_bytes()[:4] == b"\x89PNG"


def test_out_file_matches_stdout(tmp_path):
    target = tmp_path / "dens.csv"
    filed = _run("density", "--beta", "-0.7", "--grid", "6", "--out", str(target))
    assert filed.returncode == 0 and filed.stdout == ""
    streamed = _run("density", "--beta", "-0.7", "--grid", "6")
    assert target.read_text() == streamed.stdout


def test_pde_table():
    out = _run("pde", "--beta", "1.0", "--grid", "21")
    assert out.returncode == 0
    header, rows = _rows(out.stdout)
    assert header == "x,y,u,residual"
    assert len(rows) == 441
    assert all(np.isfinite(float(r[3])) for r in rows[:25])


def test_pde_existence_violation(tmp_path):
    table = tmp_path / "flat.csv"
    table.write_text("0.0,1.0\n1.0,1.0\n")
    out = _run("pde", "--beta", "2.0", "--grid", "21",
               "--phi", str(table), "--psi", str(table))
    assert out.returncode == 1
    assert out.stdout == ""
    error = json.loads(out.stderr)["error"]
    assert error["type"] == "ExistenceViolated"
    assert error["margin"] < 0


def test_pde_boundary_files_come_in_pairs(tmp_path):
    table = tmp_path / "flat.csv"
    table.write_text("0.0,1.0\n1.0,1.0\n")
    out = _run("pde", "--beta", "1.0", "--grid", "11", "--phi", str(table))
    assert out.returncode == 2


def test_el_csv_and_summary(tmp_path):
    target = tmp_path / "el.csv"
    out = _run("el", "--beta", "1.0", "--grid", "33", "--out", str(target))
    assert out.returncode == 0
    summary = json.loads(out.stdout)
    for key in ("iterations", "final_residual", "objective", "entropy", "energy"):
        assert key in summary
    header, rows = _rows(target.read_text())
    assert header == "x,y,u,closed_form,abs_error"
    assert len(rows) == 33 * 33
    worst = max(float(r[4]) for r in rows)
    assert worst < 0.05


def test_el_with_marginal_file(tmp_path):
    marg = tmp_path / "f.csv"
    xs = np.linspace(0.0, 1.0, 17)
    marg.write_text("".join(f"{x},{1.0 + x}\n" for x in xs))
    out = _run("el", "--beta", "0.5", "--grid", "17", "--f", str(marg),
               "--out", str(tmp_path / "el.csv"))
    assert out.returncode == 0
    assert json.loads(out.stdout)["final_residual"] < 1e-9


def test_asep_profile_table():
    out = _run("asep-profile", "--n", "8", "--k", "4", "--beta", "2.0",
               "--samples", "500", "--seed", "1")
    header, rows = _rows(out.stdout)
    assert header == "site,frequency,stderr,rho_limit"
    assert [r[0] for r in rows] == [str(i) for i in range(1, 9)]
    assert abs(sum(float(r[1]) for r in rows) - 4.0) < 1e-9


def test_asep_dynamics_table():
    out = _run("asep-dynamics", "--n", "6", "--k", "3", "--beta", "1.0",
               "--t", "200", "--seed", "2")
    assert out.returncode == 0
    header, rows = _rows(out.stdout)
    assert header == "site,frequency,stderr,rho_limit"
    assert len(rows) == 6
    bad = _run("asep-dynamics", "--n", "6", "--k", "3", "--beta", "1.0",
               "--t", "0")
    assert bad.returncode == 2


def test_cw_json():
    out = _run("cw", "--N", "60", "--t", "0.8", "--x", "0.2")
    assert out.returncode == 0
    payload = json.loads(out.stdout)
    assert abs(payload["pressure_exact"] - payload["pressure_hs"]) < 1e-8
    assert -1.0 < payload["magnetization"] < 1.0
    assert payload["burgers_residual_max"] < 1e-2
    free = _run("cw", "--N", "60", "--t", "0", "--x", "0.2")
    assert json.loads(free.stdout)["pressure_hs"] is None
    coarse = _run("cw", "--N", "60", "--t", "0.8", "--x", "0.2",
                  "--grid", "0.5")
    assert coarse.returncode == 2


def test_bad_arguments_exit_two():
    assert _run("sample", "--n", "5", "--beta", "1.0", "--count", "0").returncode == 2
    assert _run("density", "--beta", "1.0", "--grid", "1").returncode == 2
    assert _run("empirical", "--n", "10", "--beta", "1.0",
                "--samples", "10").returncode == 2
    assert _run("unknown-command").returncode == 2


def test_thread_cap_env_smoke():
    out = _run("pressure", "--beta", "0.5", "--n", "20", env={"MLL_THREADS": "1"})
    assert out.returncode == 0


def test_validate_quick_report():
    out = _run("validate", "--quick")
    assert out.returncode == 0
    payload = json.loads(out.stdout)
    assert payload["quick"] is True
    assert len(payload["criteria"]) == 12
    assert [c["index"] for c in payload["criteria"]] == list(range(1, 13))
    assert all(set(c) >= {"index", "name", "passed", "details"}
               for c in payload["criteria"])
    # the documented open item: the positive-coupling solver-order clause
    flags = {c["index"]: c["passed"] for c in payload["criteria"]}
    assert payload["all_passed"] == all(flags.values())
