import csv
import json
import subprocess
import sys

import numpy as np
import pytest

import uext
from uext import cli, linalg as la, measures, states


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run_cli(capsys, *argv)
    assert err == ""
    return code, json.loads(out)


class TestMeasureCommand:
    def test_emax_maxent(self, capsys):
        code, rec = run_json(capsys, "measure", "--kind", "emax",
                             "--family", "maxent", "--d", "2")
        assert code == 0
        assert rec["schema"] == 1
        assert rec["command"] == "measure"
        assert rec["kind"] == "emax"
        assert rec["value"] == pytest.approx(1.0, abs=1e-6)
        assert rec["diagnostics"]["gap"] <= 1e-7
        assert isinstance(rec["runtime_ms"], int)

    def test_emin_pure(self, capsys):
        code, rec = run_json(capsys, "measure", "--kind", "emin",
                             "--family", "pure-schmidt", "--schmidt", "0.8,0.2")
        assert code == 0
        assert rec["value"] == pytest.approx(0.321928095, abs=1e-8)

    def test_fidelity_reports_half_bits(self, capsys):
        code, rec = run_json(capsys, "measure", "--kind", "fidelity",
                             "--family", "isotropic", "--r", "0.9")
        assert code == 0
        assert 0.0 < rec["value"] < 1.0
        assert rec["e_half_bits"] == pytest.approx(
            -np.log2(rec["value"]), abs=1e-8)

    def test_petz_pure_closed_form(self, capsys):
        code, rec = run_json(capsys, "measure", "--kind", "petz",
                             "--alpha", "1.5",
                             "--family", "pure-schmidt", "--schmidt", "0.8,0.2")
        assert code == 0
        assert rec["diagnostics"]["status"] == "converged"
        assert rec["value"] == pytest.approx(0.89629149, abs=1e-4)

    def test_petz_requires_alpha(self, capsys):
        code, out, err = run_cli(capsys, "measure", "--kind", "petz",
                                 "--family", "maxent")
        assert code == 1
        assert "alpha" in err

    def test_output_is_deterministic(self, capsys):
        argv = ("measure", "--kind", "rel", "--family", "erased",
                "--eps", "0.3")
        _, first = run_json(capsys, *argv)
        _, second = run_json(capsys, *argv)
        first.pop("runtime_ms")
        second.pop("runtime_ms")
        assert first == second

    def test_nonconverged_iterative_solve_exits_two(self, capsys, monkeypatch):
        stuck = measures.MeasureResult(
            value=0.1, optimal_extension=None, dual_certificate=None,
            diagnostics={"status": "max_iters", "iterations": 500,
                         "gap_bits": 1e-3})
        monkeypatch.setattr(measures, "e_rel_u", lambda rho, opts: stuck)
        code, rec = run_json(capsys, "measure", "--kind", "rel",
                             "--family", "maxent")
        assert code == 2
        assert rec["diagnostics"]["status"] == "max_iters"

    def test_extension_order_guard(self, capsys):
        code, out, err = run_cli(capsys, "measure", "--kind", "emax",
                                 "--family", "maxent", "--d", "20")
        assert code == 1
        assert "exceeds the guard" in err

    def test_missing_state_and_family(self, capsys):
        code, out, err = run_cli(capsys, "measure", "--kind", "emax")
        assert code == 1
        assert "--state" in err

    def test_bad_usage_exits_one(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["measure", "--kind", "negativity", "--family", "maxent"])
        assert exc.value.code == 1


class TestStateFiles:
    def test_round_trip_is_bit_identical(self, tmp_path, capsys):
        rho = states.random_bipartite_state(2, 2, seed=40)
        path = tmp_path / "state.json"
        cli.save_state(str(path), rho)
        back = cli.load_state(str(path))
        assert back.d_a == rho.d_a and back.d_b == rho.d_b
        assert np.array_equal(back.rho, rho.rho)
        assert back.label == rho.label

    def test_measure_from_file_matches_family(self, tmp_path, capsys):
        path = tmp_path / "iso.json"
        cli.save_state(str(path), states.isotropic(2, 0.9))
        _, from_file = run_json(capsys, "measure", "--kind", "emax",
                                "--state", str(path))
        _, from_family = run_json(capsys, "measure", "--kind", "emax",
                                  "--family", "isotropic", "--r", "0.9")
        assert from_file["value"] == from_family["value"]

    def test_unreadable_file(self, capsys, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        code, out, err = run_cli(capsys, "measure", "--kind", "emax",
                                 "--state", str(path))
        assert code == 1
        assert "cannot read" in err

    def test_invalid_state_rejected(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        payload = {"dims": {"A": 2, "B": 2},
                   "matrix": [[[1.0, 0.0]] * 4] * 4}
        path.write_text(json.dumps(payload))
        code, out, err = run_cli(capsys, "measure", "--kind", "emax",
                                 "--state", str(path))
        assert code == 1


class TestCheckCommand:
    def test_feasible_with_certificate(self, capsys, tmp_path):
        cert = tmp_path / "ext.json"
        code, rec = run_json(capsys, "check-extendible", "--family",
                             "isotropic", "--r", "0.5",
                             "--certificate", str(cert))
        assert code == 0
        assert rec["feasible"] is True
        assert rec["certificate_file"] == str(cert)
        ext = cli.load_state(str(cert))
        assert (ext.d_a, ext.d_b) == (2, 4)
        marginal = la.partial_trace(ext.rho, [2, 2, 2], (2,))
        assert np.max(np.abs(marginal - states.isotropic(2, 0.5).rho)) <= 1e-7

    def test_infeasible(self, capsys):
        code, rec = run_json(capsys, "check-extendible", "--family", "maxent")
        assert code == 0
        assert rec["feasible"] is False
        assert rec["margin"] < 0


class TestBoundsCommand:
    def test_key_overhead(self, capsys):
        code, rec = run_json(capsys, "bounds", "--task", "key-overhead",
                             "--family", "erased", "--eps", "0.5")
        assert code == 0
        assert rec["value"] == pytest.approx(2.0, abs=1e-4)
        assert rec["measure"] == "e_rel_u"

    def test_exact_ent(self, capsys):
        code, rec = run_json(capsys, "bounds", "--task", "exact-ent",
                             "--family", "maxent", "--d", "2")
        assert code == 0
        assert rec["value"] == pytest.approx(1.0, abs=1e-6)
        assert rec["measure"] == "e_min_u"

    def test_infinite_overhead_serializes(self, capsys):
        code, rec = run_json(capsys, "bounds", "--task", "ent-overhead",
                             "--family", "isotropic", "--r", "0.5")
        assert code == 0
        assert rec["value"] == "inf"


class TestSweepCommand:
    def test_erased_grid_csv(self, capsys, tmp_path):
        out = tmp_path / "erased.csv"
        code, _, err = run_cli(capsys, "sweep", "--family", "erased",
                               "--grid", "0:0.5:11", "--measures", "e_rel",
                               "--out", str(out))
        assert code == 0 and err == ""
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == list(cli._CSV_COLUMNS)
        assert len(rows) == 12
        for row in rows[1:]:
            eps = float(row[0])
            assert float(row[5]) == pytest.approx(1.0 / (1.0 - eps), abs=1e-3)
            assert row[2] == ""  # e_max was not requested

    def test_stdout_and_empty_grid(self, capsys):
        code, out, err = run_cli(capsys, "sweep", "--family", "erased",
                                 "--grid", "", "--measures", "e_rel")
        assert code == 0
        assert out.strip() == ",".join(cli._CSV_COLUMNS)

    def test_unknown_measure(self, capsys):
        code, out, err = run_cli(capsys, "sweep", "--family", "erased",
                                 "--grid", "0.1", "--measures", "negativity")
        assert code == 1

    def test_bad_grid(self, capsys):
        code, out, err = run_cli(capsys, "sweep", "--family", "erased",
                                 "--grid", "0:1:3:4")
        assert code == 1


class TestEnvironmentAndVersion:
    def test_invalid_solver_tol(self, capsys, monkeypatch):
        monkeypatch.setenv("UEXT_SOLVER_TOL", "banana")
        code, out, err = run_cli(capsys, "measure", "--kind", "emax",
                                 "--family", "maxent")
        assert code == 1
        assert "UEXT_SOLVER_TOL" in err

    def test_out_of_range_solver_tol(self, capsys, monkeypatch):
        monkeypatch.setenv("UEXT_SOLVER_TOL", "2.0")
        code, out, err = run_cli(capsys, "measure", "--kind", "emax",
                                 "--family", "maxent")
        assert code == 1

    def test_valid_solver_tol(self, capsys, monkeypatch):
        monkeypatch.setenv("UEXT_SOLVER_TOL", "1e-7")
        code, rec = run_json(capsys, "measure", "--kind", "emax",
                             "--family", "maxent")
        assert code == 0
        assert rec["value"] == pytest.approx(1.0, abs=1e-5)

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["--version"])
        assert exc.value.code == 0
        out, _ = capsys.readouterr()
        assert uext.__version__ in out


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "uext.cli", "measure", "--kind", "emin",
         "--family", "pure-schmidt", "--schmidt", "0.8,0.2"],
        capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0, proc.stderr
    rec = json.loads(proc.stdout)
    assert rec["value"] == pytest.approx(0.321928095, abs=1e-8)
