import json

import numpy as np
import pytest

from podburgers import dataio
from podburgers.analysis import (
    REGRESSION_CSV_HEADER,
    REPORT_CSV_HEADER,
    ErrorReport,
    RegressionResult,
)
from podburgers.fom import SnapshotSet


def _report(r):
    return ErrorReport(
        r=r,
        err_linf_l2=1.0 / r,
        err_natural=2.0 / r,
        eta_linf_l2=0.5 / r,
        tail=1e-3 / r,
        rhs1=3.0 / r,
        rhs2=2.5 / r,
        rhs_family=("noDQ-RHS1", "noDQ-RHS2"),
        truly_optimal=0.1,
        optimal_i=0.2,
        optimal_ii=0.15,
        s_r_norm=4.0,
        m_r_inv_norm=1.0,
        phi0_norm=1e-7,
    )


class TestSnapshotRoundTrip:
    def test_lossless(self, tmp_path, rng):
        snaps = SnapshotSet(dt=1e-3, values=rng.standard_normal((7, 15)))
        path = tmp_path / "snaps.csv"
        dataio.write_snapshots(path, snaps, n_cells=16, nu=1e-2, t_final=6e-3)
        loaded, meta = dataio.read_snapshots(path)
        assert np.array_equal(loaded.values, snaps.values)
        assert loaded.dt == snaps.dt
        assert meta == {"n_cells": 16, "dt": 1e-3, "nu": 1e-2, "t_final": 6e-3}

    def test_write_is_deterministic(self, tmp_path, rng):
        snaps = SnapshotSet(dt=1e-3, values=rng.standard_normal((3, 5)))
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        dataio.write_snapshots(p1, snaps, 6, 1e-2, 2e-3)
        dataio.write_snapshots(p2, snaps, 6, 1e-2, 2e-3)
        assert p1.read_bytes() == p2.read_bytes()

    def test_width_mismatch_detected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("n_cells=10,dt=0.001,nu=0.01,t_final=0.002\n1.0,2.0\n")
        with pytest.raises(ValueError):
            dataio.read_snapshots(path)

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("nonsense\n1.0,2.0\n")
        with pytest.raises(ValueError):
            dataio.read_snapshots(path)


class TestBasisRoundTrip:
    def test_lossless(self, tmp_path, small_run, small_bases):
        cfg, *_ = small_run
        basis = small_bases["DQ-H01"]
        path = tmp_path / "basis_DQ-H01.csv"
        dataio.write_basis(path, basis, n_cells=cfg.n_cells, cutoff=cfg.eigenvalue_cutoff)
        loaded, sidecar = dataio.read_basis(path)
        assert np.array_equal(loaded.modes, basis.modes)
        assert np.array_equal(loaded.eigenvalues, basis.eigenvalues)
        assert loaded.inner_product == "H01"
        assert loaded.use_dq is True
        assert loaded.weight_m == basis.weight_m
        assert sidecar["n_cells"] == cfg.n_cells

    def test_sidecar_is_valid_json(self, tmp_path, small_run, small_bases):
        cfg, *_ = small_run
        path = tmp_path / "basis.csv"
        dataio.write_basis(path, small_bases["noDQ-L2"], cfg.n_cells, 1e-12)
        sidecar = json.loads(path.with_suffix(".json").read_text())
        assert set(sidecar) == {
            "eigenvalues",
            "inner_product",
            "use_dq",
            "weight_m",
            "eigenvalue_cutoff",
            "n_cells",
        }


class TestTrajectoryRoundTrip:
    def test_lossless(self, tmp_path, rng):
        coeffs = rng.standard_normal((9, 4))
        path = tmp_path / "traj.csv"
        dataio.write_trajectory(path, coeffs, r=4, nu=1e-2, dt=1e-3, basis_id="DQ-L2")
        loaded, meta = dataio.read_trajectory(path)
        assert np.array_equal(loaded, coeffs)
        assert meta == {"r": 4, "nu": 1e-2, "dt": 1e-3, "basis": "DQ-L2"}


class TestReportCsv:
    def test_exact_header_and_shape(self, tmp_path):
        path = tmp_path / "report.csv"
        dataio.write_report_csv(path, [_report(2), _report(3)])
        lines = path.read_text().splitlines()
        assert lines[0] == REPORT_CSV_HEADER
        assert len(lines) == 3
        assert lines[1].startswith("2,")
        assert len(lines[1].split(",")) == len(REPORT_CSV_HEADER.split(","))

    def test_values_round_trip_through_text(self, tmp_path):
        path = tmp_path / "report.csv"
        rep = _report(7)
        dataio.write_report_csv(path, [rep])
        row = path.read_text().splitlines()[1].split(",")
        assert float(row[1]) == rep.err_linf_l2
        assert float(row[12]) == rep.phi0_norm


class TestRegressionCsv:
    def test_header_and_rows(self, tmp_path):
        path = tmp_path / "regression.csv"
        rows = [
            ("err_linf_l2", RegressionResult(1.05, -2.3, 0.99, 2, 38)),
            ("err_natural", RegressionResult(0.97, -2.1, 0.98, 2, 38)),
        ]
        dataio.write_regression_csv(path, rows)
        lines = path.read_text().splitlines()
        assert lines[0] == REGRESSION_CSV_HEADER
        assert lines[1].split(",")[0] == "err_linf_l2"
        assert float(lines[1].split(",")[1]) == 1.05


class TestSolutionCsv:
    def test_header_and_columns(self, tmp_path):
        path = tmp_path / "solution.csv"
        x = np.linspace(0.0, 1.0, 5)
        dataio.write_solution_csv(path, x, np.sin(x), np.cos(x))
        lines = path.read_text().splitlines()
        assert lines[0] == "x,u_fom,u_rom"
        assert len(lines) == 6
