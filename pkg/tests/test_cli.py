"""End-to-end CLI behavior: commands, determinism, exit codes, schema."""

import subprocess
import sys

import numpy as np
import pytest

from varifolds.cli import main
from varifolds.formats import read_atoms, read_grid

from conftest import FIXTURES


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


class TestGenerate:
    def test_line_roundtrip(self, tmp_path, capsys):
        out = tmp_path / "line.vatoms"
        code, stdout, _ = run(["generate", "--shape", "line", "--a", "0,0", "--b", "1,1",
                               "--count", "32", "--out", str(out)], capsys)
        assert code == 0
        assert "total mass" in stdout
        v = read_atoms(out)
        assert v.count == 32
        assert v.total_mass == pytest.approx(np.sqrt(2.0), abs=1e-12)

    def test_square_cloud_deterministic(self, tmp_path, capsys):
        a = tmp_path / "a.vatoms"
        b = tmp_path / "b.vatoms"
        for out in (a, b):
            code, _, _ = run(["generate", "--shape", "square-cloud", "--count", "100",
                              "--seed", "9", "--out", str(out)], capsys)
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_graph_shape(self, tmp_path, capsys):
        out = tmp_path / "g.vatoms"
        code, _, _ = run(["generate", "--shape", "graph", "--graph-fn", "parabola",
                          "--grid", "200", "--out", str(out)], capsys)
        assert code == 0
        assert read_atoms(out).count == 200


class TestDiscretize:
    def test_writes_grid_file(self, tmp_path, capsys):
        out = tmp_path / "cells.vgrid"
        code, _, _ = run(["discretize", "--in", str(FIXTURES / "diagonal_line.vatoms"),
                          "--h", "0.25", "--domain", "0,0:1,1", "--out", str(out)], capsys)
        assert code == 0
        dv = read_grid(out)
        assert dv.grid.counts == (4, 4)
        assert dv.total_mass == pytest.approx(np.sqrt(2.0), rel=1e-12)


class TestFirstvar:
    def test_shipped_diagonal_fixture_totals_four(self, tmp_path, capsys):
        out = tmp_path / "fv.csv"
        code, stdout, _ = run(["firstvar", "--in", str(FIXTURES / "diagonal_line.vatoms"),
                               "--h", "0.5", "--domain", "0,0:1,1", "--out", str(out)],
                              capsys)
        assert code == 0
        header, rows = read_csv(out)
        assert header[0] == "kind"
        totals = [row for row in rows if row[0] == "total"]
        assert len(totals) == 1
        assert float(totals[0][-1]) == pytest.approx(4.0, rel=1e-12)

    def test_accepts_grid_file_directly(self, tmp_path, capsys):
        grid_file = tmp_path / "cells.vgrid"
        run(["discretize", "--in", str(FIXTURES / "diagonal_line.vatoms"),
             "--h", "0.5", "--domain", "0,0:1,1", "--out", str(grid_file)], capsys)
        out = tmp_path / "fv.csv"
        code, _, _ = run(["firstvar", "--in", str(grid_file), "--out", str(out)], capsys)
        assert code == 0
        _, rows = read_csv(out)
        assert float(rows[-1][-1]) == pytest.approx(4.0, rel=1e-12)

    def test_atoms_without_h_is_validation_error(self, tmp_path, capsys):
        code, _, err = run(["firstvar", "--in", str(FIXTURES / "diagonal_line.vatoms"),
                            "--out", str(tmp_path / "x.csv")], capsys)
        assert code == 2
        assert "--h" in err


class TestEnergy:
    def test_alpha_one_gives_zeros(self, tmp_path, capsys):
        src = tmp_path / "circ.vatoms"
        run(["generate", "--shape", "circle", "--count", "500", "--out", str(src)], capsys)
        out = tmp_path / "e.csv"
        code, _, _ = run(["energy", "--in", str(src), "--point", "1,0",
                          "--plane", "0,1", "--alphas", "1.0", "--out", str(out)], capsys)
        assert code == 0
        _, rows = read_csv(out)
        assert [float(r[1]) for r in rows] == [0.0]

    def test_curve_decreasing_in_alpha(self, tmp_path, capsys):
        src = tmp_path / "circ.vatoms"
        run(["generate", "--shape", "circle", "--count", "500", "--out", str(src)], capsys)
        out = tmp_path / "e.csv"
        code, _, _ = run(["energy", "--in", str(src), "--point", "1,0", "--estimate",
                          "--alpha-range", "0.02:1:10", "--out", str(out)], capsys)
        assert code == 0
        _, rows = read_csv(out)
        alphas = [float(r[0]) for r in rows]
        values = [float(r[1]) for r in rows]
        assert alphas == sorted(alphas, reverse=True)
        assert all(b >= a - 1e-15 for a, b in zip(values, values[1:]))

    def test_plane_or_estimate_required(self, tmp_path, capsys):
        src = tmp_path / "circ.vatoms"
        run(["generate", "--shape", "circle", "--count", "64", "--out", str(src)], capsys)
        code, _, err = run(["energy", "--in", str(src), "--point", "1,0",
                            "--out", str(tmp_path / "e.csv")], capsys)
        assert code == 2
        assert "--plane or --estimate" in err


class TestTangent:
    def test_circle_field_csv(self, tmp_path, capsys):
        src = tmp_path / "circ.vatoms"
        run(["generate", "--shape", "circle", "--count", "2000", "--out", str(src)], capsys)
        out = tmp_path / "t.csv"
        code, _, _ = run(["tangent", "--in", str(src), "--alpha", "0.05",
                          "--sample", "50", "--oracle", "256", "--out", str(out)], capsys)
        assert code == 0
        header, rows = read_csv(out)
        assert header[:2] == ["x_1", "x_2"]
        assert "oracle_gap" in header
        assert len(rows) == 50
        for row in rows:
            x = np.array([float(row[0]), float(row[1])])
            basis = np.array([float(row[2]), float(row[3])])
            tangent_dir = np.array([-x[1], x[0]]) / np.linalg.norm(x)
            angle = np.degrees(np.arccos(np.clip(abs(basis @ tangent_dir), 0, 1)))
            assert angle < 1.0
            assert float(row[header.index("oracle_gap")]) >= -1e-12

    def test_full_field_every_atom_below_one_degree(self, tmp_path, capsys):
        src = tmp_path / "circ.vatoms"
        run(["generate", "--shape", "circle", "--count", "4000", "--out", str(src)], capsys)
        out = tmp_path / "t.csv"
        code, _, _ = run(["tangent", "--in", str(src), "--alpha", "0.05",
                          "--out", str(out)], capsys)
        assert code == 0
        header, rows = read_csv(out)
        assert len(rows) == 4000
        worst = 0.0
        for row in rows:
            x = np.array([float(row[0]), float(row[1])])
            basis = np.array([float(row[2]), float(row[3])])
            tangent_dir = np.array([-x[1], x[0]]) / np.linalg.norm(x)
            cos = np.clip(abs(basis @ tangent_dir), 0, 1)
            worst = max(worst, float(np.degrees(np.arccos(cos))))
        assert worst < 1.0

    def test_isolated_points_recorded_not_fatal(self, tmp_path, capsys):
        src = tmp_path / "two.vatoms"
        run(["generate", "--shape", "line", "--a", "0,0", "--b", "0.001,0.001",
             "--count", "2", "--out", str(src)], capsys)
        out = tmp_path / "t.csv"
        code, _, _ = run(["tangent", "--in", str(src), "--alpha", "0.5",
                          "--r-max", "0.6", "--out", str(out)], capsys)
        assert code == 0


class TestSweep:
    def test_circle_sweep_columns_and_rule(self, tmp_path, capsys):
        src = tmp_path / "circ.vatoms"
        run(["generate", "--shape", "circle", "--count", "2000", "--out", str(src)], capsys)
        out = tmp_path / "s.csv"
        code, stdout, _ = run(["sweep", "--in", str(src), "--h-list", "0.25,0.125",
                               "--alpha-exp", "0.2", "--sample", "200",
                               "--out", str(out)], capsys)
        assert code == 0
        assert "decreasing across the sweep" in stdout
        header, rows = read_csv(out)
        assert header == ["delta", "alpha", "firstvar_total", "h_times_total",
                          "integrated_energy", "c1", "c2"]
        assert len(rows) == 2
        for row in rows:
            delta, alpha = float(row[0]), float(row[1])
            assert alpha == pytest.approx(delta**0.2, rel=1e-12)

    def test_violating_exponent_warns(self, tmp_path, capsys):
        src = tmp_path / "circ.vatoms"
        run(["generate", "--shape", "circle", "--count", "500", "--out", str(src)], capsys)
        code, stdout, _ = run(["sweep", "--in", str(src), "--h-list", "0.25,0.125",
                               "--alpha-exp", "10", "--sample", "100",
                               "--out", str(tmp_path / "s.csv")], capsys)
        assert code == 0
        assert "warning" in stdout
        assert "nondecreasing" in stdout

    def test_byte_identical_rerun(self, tmp_path, capsys):
        src = tmp_path / "circ.vatoms"
        run(["generate", "--shape", "circle", "--count", "800", "--out", str(src)], capsys)
        outs = []
        for name in ("s1.csv", "s2.csv"):
            out = tmp_path / name
            code, _, _ = run(["sweep", "--in", str(src), "--h-list", "0.25,0.125",
                              "--alpha-exp", "0.2", "--sample", "100", "--seed", "3",
                              "--out", str(out)], capsys)
            assert code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_increasing_h_list_rejected(self, tmp_path, capsys):
        src = tmp_path / "circ.vatoms"
        run(["generate", "--shape", "circle", "--count", "100", "--out", str(src)], capsys)
        code, _, err = run(["sweep", "--in", str(src), "--h-list", "0.125,0.25",
                            "--out", str(tmp_path / "s.csv")], capsys)
        assert code == 2
        assert "h-list" in err


class TestRegularity:
    def test_circle_report(self, tmp_path, capsys):
        src = tmp_path / "circ.vatoms"
        run(["generate", "--shape", "circle", "--count", "2000", "--out", str(src)], capsys)
        out = tmp_path / "r.csv"
        code, stdout, _ = run(["regularity", "--in", str(src), "--h-list",
                               "0.25,0.125,0.0625", "--alpha-exp", "0.2",
                               "--sample", "200", "--out", str(out)], capsys)
        assert code == 0
        assert "density  : pass" in stdout
        assert "overall  : pass" in stdout
        assert "jones integrals" in stdout
        header, rows = read_csv(out)
        assert header == ["delta", "alpha", "beta_cut", "c1", "c2", "integrated_energy"]
        assert len(rows) == 3

    def test_square_cloud_fails_density(self, tmp_path, capsys):
        src = tmp_path / "sq.vatoms"
        run(["generate", "--shape", "square-cloud", "--count", "20000", "--seed", "2",
             "--out", str(src)], capsys)
        code, stdout, _ = run(["regularity", "--in", str(src), "--h-list",
                               "0.25,0.125,0.0625", "--alpha-exp", "0.2",
                               "--sample", "200",
                               "--out", str(tmp_path / "r.csv")], capsys)
        assert code == 0
        assert "density  : FAIL" in stdout
        assert "overall  : FAIL" in stdout


class TestSchemaAndErrors:
    def test_schema_prints_formats(self, capsys):
        code, stdout, _ = run(["--schema"], capsys)
        assert code == 0
        assert "varifold-atoms v1" in stdout
        assert "varifold-grid v1" in stdout
        assert "firstvar" in stdout and "sweep" in stdout
        assert "VARIFOLDS_BACKEND" in stdout

    def test_no_command_usage(self, capsys):
        code, _, err = run([], capsys)
        assert code == 2
        assert "usage" in err

    def test_missing_file_is_system_error(self, tmp_path, capsys):
        with pytest.raises(FileNotFoundError):
            run(["firstvar", "--in", str(tmp_path / "missing.vatoms"), "--h", "0.5",
                 "--out", str(tmp_path / "x.csv")], capsys)

    def test_numeric_failure_exit_code(self, tmp_path, capsys):
        src = tmp_path / "line.vatoms"
        run(["generate", "--shape", "line", "--count", "16", "--out", str(src)], capsys)
        # energy with --estimate at a far-away point: no local data -> exit 3
        code, _, err = run(["energy", "--in", str(src), "--point", "50,50",
                            "--estimate", "--alphas", "0.5",
                            "--out", str(tmp_path / "e.csv")], capsys)
        assert code == 3
        assert "no local data" in err

    def test_unknown_shape_exits_two(self, tmp_path):
        result = subprocess.run(
            [sys.executable, "-m", "varifolds", "generate", "--shape", "cube",
             "--out", str(tmp_path / "x.vatoms")],
            capture_output=True, text=True)
        assert result.returncode == 2

    def test_module_invocation_smoke(self):
        result = subprocess.run([sys.executable, "-m", "varifolds", "--schema"],
                                capture_output=True, text=True)
        assert result.returncode == 0
        assert "varifold-atoms" in result.stdout
