import csv
import os
import subprocess
import sys

import numpy as np
import pytest

from nitsche_uppr import cli
from nitsche_uppr.cli import ExperimentConfig, load_config, main, parse_config, run
from nitsche_uppr.errors import ConfigError
from nitsche_uppr.io import read_vtk, write_csv, write_vtk
from nitsche_uppr.mesh import read_mesh


def read_rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


# -- configuration -----------------------------------------------------------------------

def test_parse_config_types_and_comments():
    text = "# study\nexample = ex51d\nlevels=3  # three meshes\nemit_fields = yes\nsolver_tol = 1e-12\n\n"
    got = parse_config(text)
    assert got == {"example": "ex51d", "levels": 3, "emit_fields": True, "solver_tol": 1e-12}


@pytest.mark.parametrize("text,where", [("levels = three", ":1:"), ("\nfoo = 1", ":2:"), ("example", ":1:"),
                                        ("emit_fields = maybe", ":1:")])
def test_parse_config_errors_carry_line(text, where):
    with pytest.raises(ConfigError) as info:
        parse_config(text, "run.cfg")
    assert "run.cfg" + where in str(info.value)


def test_load_config_overrides(tmp_path):
    path = tmp_path / "a.cfg"
    path.write_text("example = ex52\nlevels = 2\n")
    cfg = load_config(path, {"levels": 3, "theta": "0.5"})
    assert (cfg.example, cfg.levels, cfg.theta) == ("ex52", 3, 0.5)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")


@pytest.mark.parametrize("bad", [dict(example="ex9"), dict(levels=0), dict(q_penalty_scaling="other"),
                                 dict(check="loud"), dict(solver_tol=-1.0), dict(curved_subdivisions=0)])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig(**bad).validate()


def test_desk_scale_cap():
    cfg = ExperimentConfig(example="ex51a", levels=6)
    with pytest.raises(ConfigError):
        list(cli.level_meshes(cfg, cli._problem(cfg)))
    meshes = cli.level_meshes(ExperimentConfig(example="ex51a", levels=6, allow_large=True), cli._problem(cfg))
    assert next(meshes).n_triangles == 2 * 32 * 32


# -- study runs ---------------------------------------------------------------------------------

def test_ex51a_study_table():
    report = run(ExperimentConfig(example="ex51a", levels=4), write=False)
    expected = [4.61e-2, 2.34e-2, 1.17e-2, 5.88e-3]
    for row, ref in zip(report.rows, expected):
        assert row.De == pytest.approx(ref, rel=0.15)
    assert [r.h for r in report.rows] == pytest.approx([1 / 16, 1 / 32, 1 / 64, 1 / 128])


def test_ex51d_recovery_orders():
    report = run(ExperimentConfig(example="ex51d", levels=3), write=False)
    assert report.orders("Dre") == pytest.approx([1.33, 1.46], abs=0.15)


def test_custom_affine_is_exact():
    report = run(ExperimentConfig(example="custom", levels=3, solver_tol=1e-13), write=False)
    for row in report.rows:
        assert max(row.De, row.Die, row.Dre) <= 1e-10


def test_study_writes_deterministic_files(tmp_path, capsys):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}"
        assert main(["study", "--example", "ex51a", "--levels", "2", "--out", str(out)]) == 0
        outs.append(out)
    a, b = (o / "ex51a.csv" for o in outs)
    assert a.read_bytes() == b.read_bytes()
    rows = read_rows(a)
    assert rows[0] == ["level", "h", "De", "order", "Die", "order", "Dre", "order"] and len(rows) == 3
    assert (outs[0] / "ex51a.txt").read_text().startswith("ex51a")
    assert "1/32" in capsys.readouterr().out


def test_emit_fields(tmp_path):
    out = tmp_path / "fields"
    assert main(["study", "--example", "ex51a", "--levels", "1", "--out", str(out), "--set", "emit_fields=true"]) == 0
    level = out / "ex51a_level0"
    names = sorted(os.listdir(level))
    assert names == sorted(f"{k}_s{s}.{e}" for k in ("solution", "recovered") for s in (1, 2) for e in ("csv", "vtk"))
    st = cli._solve(ExperimentConfig(), cli.uniform_mesh(32), cli._problem(ExperimentConfig()))
    for side in (1, 2):
        n_side = len(st.dofmap.nodes(side))
        sol = read_rows(level / f"solution_s{side}.csv")
        rec = read_rows(level / f"recovered_s{side}.csv")
        assert sol[0] == ["side", "node_x", "node_y", "u"] and len(sol) == n_side + 1
        assert rec[0] == ["side", "node_x", "node_y", "gx", "gy"] and len(rec) == n_side + 1
        vtk = read_vtk(level / f"recovered_s{side}.vtk")
        assert vtk["points"].shape == (n_side, 3)
        assert set(vtk["data"]) == {"gx", "gy"}
        assert vtk["cells"].max() < n_side
        assert read_vtk(level / f"solution_s{side}.vtk")["data"]["u"].shape == (n_side,)


def test_recovered_field_reflection_symmetry(tmp_path):
    out = tmp_path / "sym"
    main(["study", "--example", "ex51a", "--levels", "1", "--out", str(out), "--set", "emit_fields=true"])
    for side in (1, 2):
        rows = np.array(read_rows(out / "ex51a_level0" / f"recovered_s{side}.csv")[1:], dtype=float)
        key = {(round(x, 9), round(y, 9)): (gx, gy) for _, x, y, gx, gy in rows}
        scale = np.abs(rows[:, 3:]).max()
        worst, pairs = 0.0, 0
        for (x, y), (gx, gy) in key.items():
            mirror = key.get((y, x))
            if mirror is not None:
                worst = max(worst, abs(gx - mirror[1]))
                pairs += 1
        assert pairs == len(key)
        assert worst <= 0.02 * scale


# -- other subcommands and exit codes ----------------------------------------------------------

def test_solve_command(capsys):
    assert main(["solve", "--example", "ex51a", "--n", "32"]) == 0
    text = capsys.readouterr().out
    assert "effectivity" in text and "De =" in text


def test_mesh_and_check_commands(tmp_path, capsys):
    path = tmp_path / "petal.mesh"
    assert main(["mesh", "--interface", "petal6", "--out", str(path)]) == 0
    assert read_mesh(path).is_conforming()
    assert main(["check", "--interface", "petal6", "--mesh", str(path)]) == 0
    assert main(["check", "--interface", "sharp20", "--n", "8"]) == 2
    assert "violation: element" in capsys.readouterr().out


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("levels = x\n")
    assert main(["study", str(bad)]) == 4
    assert main(["study", "--example", "nope"]) == 4
    assert main(["check", "--interface", "circle"]) == 4
    assert main(["solve", "--example", "ex52", "--n", "8", "--set", "check=raise"]) == 2
    assert main(["solve", "--example", "ex51a", "--n", "64", "--set", "solver_maxit=3"]) == 3
    err = capsys.readouterr().err
    assert "config error" in err and "assumption violated" in err and "solver failure" in err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nitsche_uppr.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "study" in proc.stdout


# -- writers ------------------------------------------------------------------------------------

def test_vtk_roundtrip(tmp_path):
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    tris = np.array([[0, 1, 2], [1, 3, 2]])
    vec = np.array([[0.1, -2.0], [1 / 3, 0.0], [5.0, 6.0], [7.0, 8.0]])
    path = tmp_path / "f.vtk"
    write_vtk(path, pts, tris, {"u": np.arange(4.0) / 7, "g": vec}, "demo\nfield")
    got = read_vtk(path)
    assert np.array_equal(got["points"][:, :2], pts) and np.array_equal(got["cells"], tris)
    assert np.array_equal(got["data"]["u"], np.arange(4.0) / 7)
    assert np.array_equal(got["data"]["g"][:, :2], vec)
    bad = tmp_path / "bad.vtk"
    bad.write_text("hello\n")
    with pytest.raises(ValueError):
        read_vtk(bad)


def test_csv_writer_keeps_full_precision(tmp_path):
    path = tmp_path / "x.csv"
    write_csv(path, ["a", "b"], [[1, np.float64(1 / 3)]])
    assert read_rows(path)[1] == ["1", repr(1 / 3)]
