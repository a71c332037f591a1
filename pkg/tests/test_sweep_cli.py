import json
import math
import subprocess
import sys

import numpy as np
import pytest

from dgfchain import BasisSpec, ModelParams
from dgfchain.sweep import (SweepGrid, SweepTable, csv_body, emit, read_table,
                            run_sweep)

from conftest import SQRT2


def small_grid(task, n=3, workers=1, **base_kw):
    base = ModelParams(L=8, t=0.5, gamma_up=0.5, **base_kw)
    thetas = np.linspace(0.05, 0.95, n) * math.pi
    return SweepGrid.from_theta_axes(base, BasisSpec(), task, thetas, thetas,
                                     r=SQRT2, workers=workers)


def test_single_point_equals_direct():
    from dgfchain import classify_phase
    base = ModelParams(L=8, t=0.5)
    p = ModelParams.from_angles(8, 0.1 * math.pi, 0.9 * math.pi, SQRT2, t=0.5)
    grid = SweepGrid.from_uv_points(base, BasisSpec(), "invariants",
                                    [(p.u_up, p.v_up, p.u_dn, p.v_dn)])
    table = run_sweep(grid)
    assert len(table.rows) == 1
    assert table.column("label")[0] == classify_phase(p).label
    assert table.column("error")[0] == ""


def test_grid_shape_and_manifest():
    table = run_sweep(small_grid("invariants", n=4))
    assert len(table.rows) == 16
    assert table.manifest["task"] == "invariants"
    assert table.manifest["n_points"] == 16
    assert "code_version" in table.manifest
    assert all(len(r) == len(table.columns) for r in table.rows)


def test_errors_recorded_not_fatal():
    base = ModelParams(L=8, t=0.5)
    # u = v exactly: critical point must land in the error column
    grid = SweepGrid.from_uv_points(base, BasisSpec(), "invariants",
                                    [(1.0, 1.0, 0.5, 1.0), (2.0, 1.0, 0.5, 1.0)])
    table = run_sweep(grid)
    assert "CriticalParameterError" in table.column("error")[0]
    assert table.column("error")[1] == ""


def test_parallel_equals_serial(tmp_path):
    t_serial = run_sweep(small_grid("dgf-magnitude", n=3, workers=1))
    t_par = run_sweep(small_grid("dgf-magnitude", n=3, workers=4))
    p1 = tmp_path / "serial.csv"
    p2 = tmp_path / "parallel.csv"
    emit(t_serial, str(p1))
    emit(t_par, str(p2))
    assert csv_body(str(p1)) == csv_body(str(p2))


def test_determinism_across_runs(tmp_path):
    paths = []
    for i in range(2):
        table = run_sweep(small_grid("max-im-energy", n=2,
                                     bc_up="periodic", bc_dn="periodic"))
        path = tmp_path / f"run{i}.csv"
        emit(table, str(path))
        paths.append(path)
    assert csv_body(str(paths[0])) == csv_body(str(paths[1]))


def test_csv_roundtrip_bit_exact(tmp_path):
    table = run_sweep(small_grid("dgf-magnitude", n=3))
    path = str(tmp_path / "t.csv")
    emit(table, path)
    back = read_table(path)
    assert back.columns == table.columns
    for r1, r2 in zip(table.rows, back.rows):
        for a, b in zip(r1, r2):
            if isinstance(a, float):
                assert b == a or (math.isnan(a) and math.isnan(b))
            else:
                assert str(b) == str(a) or b == a
    assert back.manifest["task"] == "dgf-magnitude"


def test_json_roundtrip(tmp_path):
    table = run_sweep(small_grid("pt-flags", n=2))
    path = str(tmp_path / "t.json")
    emit(table, path, format="json")
    back = read_table(path)
    assert back.columns == table.columns
    assert back.rows[0][table.columns.index("label")] == table.rows[0][
        table.columns.index("label")]


def test_empty_table_header_only(tmp_path):
    table = SweepTable(columns=["a", "b"], rows=[], manifest={"task": "none"})
    path = str(tmp_path / "empty.csv")
    emit(table, path)
    assert csv_body(path) == "a,b\n"


def test_manifest_carries_seed(tmp_path):
    base = ModelParams(L=8, t=0.5, disorder_lambda=0.2, disorder_seed=77)
    grid = SweepGrid.from_uv_points(base, BasisSpec(), "invariants",
                                    [(1.0, 0.5, 1.0, 0.4)])
    table = run_sweep(grid)
    assert table.manifest["seed"] == 77
    path = str(tmp_path / "m.csv")
    emit(table, path)
    assert read_table(path).manifest["seed"] == 77


# ---------------------------------------------------------------------------
# CLI process-level checks


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "dgfchain.cli", *args],
                          capture_output=True, text=True)


def test_cli_invariants_stdout():
    res = run_cli("invariants", "--theta-up", "0.1", "--theta-dn", "0.9", "--L", "8")
    assert res.returncode == 0
    assert "---" in res.stdout


def test_cli_config_error_exit_code():
    res = run_cli("invariants", "--L", "8")  # couplings missing
    assert res.returncode == 2
    res2 = run_cli("invariants", "--theta-up", "0.1", "--theta-dn", "0.9",
                   "--u-up", "1.0", "--v-up", "1.0", "--u-dn", "1.0",
                   "--v-dn", "1.0", "--L", "8")
    assert res2.returncode == 2  # exclusive flag groups


def test_cli_critical_point_is_numerical_failure():
    res = run_cli("bbs-energy", "--u-up", "1.0", "--v-up", "1.0",
                  "--u-dn", "0.5", "--v-dn", "1.0", "--L", "8")
    assert res.returncode in (0, 3)  # a2 formulas stay finite at criticality


def test_cli_spectrum_to_file(tmp_path):
    out = str(tmp_path / "spec.csv")
    res = run_cli("spectrum", "--theta-up", "0.1", "--theta-dn", "0.9",
                  "--L", "8", "--gamma-up", "0.5", "--bc-up", "periodic",
                  "--bc-dn", "periodic", "--out", out)
    assert res.returncode == 0
    table = read_table(out)
    assert len(table.rows) == 64
    assert "entropy" in table.columns


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "point.cfg"
    cfg.write_text("theta-up = 0.1\ntheta-dn = 0.9\nL = 8\n")
    res = run_cli("invariants", "--config", str(cfg))
    assert res.returncode == 0
    assert "---" in res.stdout
    # explicit flags override the config
    res2 = run_cli("invariants", "--config", str(cfg), "--theta-dn", "0.15")
    assert "+++" in res2.stdout


def test_cli_dynamics_and_meanfield(tmp_path):
    out = str(tmp_path / "dyn.csv")
    res = run_cli("dynamics", "--theta-up", "0.6", "--theta-dn", "0.1",
                  "--L", "8", "--gamma-up", "0.5", "--init-up", "3",
                  "--init-dn", "5", "--tmax", "5", "--dt", "1.0", "--out", out)
    assert res.returncode == 0, res.stderr
    table = read_table(out)
    assert table.column("x_up")[0] == pytest.approx(3.0)
    out2 = str(tmp_path / "mf.csv")
    res2 = run_cli("meanfield", "--u-up", "2", "--v-up", "5", "--u-dn", "1",
                   "--v-dn", "0.5", "--L", "16", "--t", "0.5", "--out", out2)
    assert res2.returncode == 0, res2.stderr
    assert "open" in csv_body(out2)


def test_cli_phase_diagram_workers(tmp_path):
    out1 = str(tmp_path / "s.csv")
    out2 = str(tmp_path / "p.csv")
    common = ["phase-diagram", "--task", "invariants", "--nx", "3", "--ny", "3",
              "--L", "8", "--theta-up-min", "0.03", "--theta-dn-min", "0.03",
              "--theta-up-max", "0.97", "--theta-dn-max", "0.97"]
    assert run_cli(*common, "--workers", "1", "--out", out1).returncode == 0
    assert run_cli(*common, "--workers", "3", "--out", out2).returncode == 0
    assert csv_body(out1) == csv_body(out2)
