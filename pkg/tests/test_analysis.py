import numpy as np
import pytest

from podburgers.analysis import (
    compute_errors,
    compute_eta,
    compute_rhs_terms,
    default_regression_range,
    operator_norm_diagnostics,
    optimality_benchmarks,
    regression_order,
)
from podburgers.fom import SnapshotSet
from podburgers.mesh_fem import H01, L2, squared_norms
from podburgers.pod import tail_sum
from podburgers.rom import assemble_rom, restrict_rom


class TestComputeErrors:
    def test_identical_inputs(self, small_run):
        cfg, _, ops, snaps = small_run
        assert compute_errors(snaps, snaps, cfg.nu, ops) == (0.0, 0.0)

    def test_constant_mode_shift_closed_form(self, small_run, small_bases):
        # rom = fom + c*phi_1 with an L2-orthonormal mode: linf error c^2,
        # natural norm adds nu dt N c^2 ||phi_1'||^2
        cfg, _, ops, snaps = small_run
        basis = small_bases["noDQ-L2"]
        c = 0.37
        phi1 = basis.modes[:, 0]
        shifted = SnapshotSet(dt=snaps.dt, values=snaps.values + c * phi1)
        err_linf, err_nat = compute_errors(snaps, shifted, cfg.nu, ops)
        n_steps = snaps.n_snapshots - 1
        grad_sq = squared_norms(phi1, H01, ops)[0]
        assert err_linf == pytest.approx(c**2, rel=1e-10)
        assert err_nat == pytest.approx(
            c**2 + cfg.nu * snaps.dt * n_steps * c**2 * grad_sq, rel=1e-10
        )

    def test_natural_dominates_linf(self, small_run, rng):
        cfg, _, ops, snaps = small_run
        noisy = SnapshotSet(
            dt=snaps.dt, values=snaps.values + 0.01 * rng.standard_normal(snaps.values.shape)
        )
        err_linf, err_nat = compute_errors(snaps, noisy, cfg.nu, ops)
        assert err_nat >= err_linf

    def test_grid_mismatch(self, small_run):
        cfg, _, ops, snaps = small_run
        other = SnapshotSet(dt=snaps.dt * 2, values=snaps.values)
        with pytest.raises(ValueError):
            compute_errors(snaps, other, cfg.nu, ops)


class TestComputeEta:
    def test_full_rank_degenerate(self, small_run, small_bases):
        cfg, _, ops, snaps = small_run
        basis = small_bases["noDQ-H01"]
        scale = np.max(squared_norms(snaps.values, L2, ops))
        assert compute_eta(snaps, basis, basis.d, ops) <= 1e-10 * scale

    def test_monotone_nonincreasing(self, small_run, small_bases):
        cfg, _, ops, snaps = small_run
        basis = small_bases["noDQ-H01"]
        etas = [compute_eta(snaps, basis, r, ops) for r in range(1, basis.d + 1)]
        assert np.all(np.diff(etas) <= 1e-12)


class TestRhsTerms:
    def test_full_rank_leaves_time_floor(self, small_run, small_bases):
        cfg, _, ops, snaps = small_run
        for basis in small_bases.values():
            rhs1, rhs2, _ = compute_rhs_terms(basis, basis.d, cfg.dt, ops, i_u_constant=2.5)
            floor = cfg.dt**2 + cfg.dt**4 * 2.5
            assert rhs1 == pytest.approx(floor, rel=1e-14)
            assert rhs2 == pytest.approx(floor, rel=1e-14)

    def test_family_selection(self, small_bases):
        names = {
            "noDQ-L2": ("noDQ-RHS1", "noDQ-RHS2"),
            "noDQ-H01": ("noDQ-RHS1", "noDQ-RHS2"),
            "DQ-L2": ("DQ-RHS1", "DQ-RHS2"),
            "DQ-H01": ("DQ-RHS3", "DQ-RHS4"),
        }
        from podburgers.analysis import rhs_family_names

        for fw, basis in small_bases.items():
            assert rhs_family_names(basis) == names[fw]

    def test_h01_dq_matches_unit_gradient_form(self, small_run, small_bases):
        # for an H01 basis, lambda (||phi||^2 + ||phi'||^2) = lambda (1 + ||phi||^2)
        cfg, _, ops, snaps = small_run
        basis = small_bases["DQ-H01"]
        r = min(3, basis.d - 1)
        rhs1, _, _ = compute_rhs_terms(basis, r, cfg.dt, ops)
        lam = basis.eigenvalues[r:]
        l2sq = squared_norms(basis.modes[:, r:].T, L2, ops)
        want = float(lam @ (1.0 + l2sq)) + cfg.dt**2
        assert rhs1 == pytest.approx(want, rel=1e-8)

    def test_rhs1_dominates_rhs2(self, small_run, small_bases):
        cfg, _, ops, snaps = small_run
        for basis in small_bases.values():
            for r in range(1, basis.d + 1):
                rhs1, rhs2, _ = compute_rhs_terms(basis, r, cfg.dt, ops)
                assert rhs1 >= rhs2


class TestOptimalityBenchmarks:
    def test_matching_w_collapses_to_tail(self, small_run, small_bases):
        cfg, _, ops, snaps = small_run
        for fw, w in (("noDQ-L2", L2), ("noDQ-H01", H01)):
            basis = small_bases[fw]
            r = min(3, basis.d)
            _, opt1, opt2 = optimality_benchmarks(snaps, basis, r, w, ops)
            assert opt1 == pytest.approx(tail_sum(basis, r), rel=1e-8)
            assert opt2 == pytest.approx(tail_sum(basis, r), rel=1e-8)

    def test_full_rank_degenerate(self, small_run, small_bases):
        cfg, _, ops, snaps = small_run
        basis = small_bases["DQ-L2"]
        truly, opt1, opt2 = optimality_benchmarks(snaps, basis, basis.d, L2, ops)
        assert truly <= 1e-10 * basis.eigenvalues[0]
        assert opt1 == 0.0 and opt2 == 0.0

    def test_optimal_ii_below_optimal_i(self, small_run, small_bases):
        # mode-by-mode minimality of the W-orthogonal projection
        cfg, _, ops, snaps = small_run
        for basis in small_bases.values():
            for r in (1, min(4, basis.d)):
                for w in (L2, H01):
                    _, opt1, opt2 = optimality_benchmarks(snaps, basis, r, w, ops)
                    assert opt2 <= opt1 * (1.0 + 1e-10)


class TestRegression:
    def test_exact_power_law(self):
        s = np.array([1e-1, 1e-2, 1e-3, 1e-4, 1e-5])
        err = 3.7 * s**1.5
        res = regression_order(list(zip(s, err)), list(range(2, 7)))
        assert res.slope == pytest.approx(1.5, abs=1e-12)
        assert res.r_squared == pytest.approx(1.0, abs=1e-12)
        assert (res.r_min, res.r_max) == (2, 6)

    def test_r_range_subselection(self):
        s = np.array([1e-1, 1e-2, 1e-3, 1e-4, 1e-5])
        err = np.array([1.0, 1e-2, 1e-4, 1e-6, 1e-8])  # slope 2
        res = regression_order(list(zip(s, err)), [2, 3, 4, 5, 6], r_range=(3, 5))
        assert res.slope == pytest.approx(2.0, abs=1e-12)
        assert (res.r_min, res.r_max) == (3, 5)

    def test_rejects_nonpositive_and_short_input(self):
        with pytest.raises(ValueError):
            regression_order([(1.0, 1.0), (0.1, -1.0), (0.01, 1.0)], [1, 2, 3])
        with pytest.raises(ValueError):
            regression_order([(1.0, 1.0), (0.1, 0.5)], [1, 2])

    def test_default_range_drops_saturated_and_spectrum_end(self):
        r_values = list(range(2, 21))
        errors = [10.0 ** (-r) for r in r_values]  # hits the 1e-12 saturation at r = 12
        rng_sel = default_regression_range(r_values, errors, d=20)
        assert rng_sel == (2, 11)  # spectrum cap min(20 - 2, 12) never binds first
        flat = [1.0] * len(r_values)
        assert default_regression_range(r_values, flat, d=20) == (2, 12)
        assert default_regression_range([1, 2], [0.1, 0.2], d=20) is None


class TestOperatorNorms:
    def test_identity_blocks(self, small_run, small_bases):
        cfg, mesh, ops, snaps = small_run
        u0 = snaps.values[0]
        rom_l2 = assemble_rom(small_bases["noDQ-L2"], min(5, small_bases["noDQ-L2"].d), mesh, ops, u0)
        _, m_inv = operator_norm_diagnostics(rom_l2)
        assert m_inv == pytest.approx(1.0, abs=1e-6)
        rom_h01 = assemble_rom(small_bases["noDQ-H01"], min(5, small_bases["noDQ-H01"].d), mesh, ops, u0)
        s_norm, _ = operator_norm_diagnostics(rom_h01)
        assert s_norm == pytest.approx(1.0, abs=1e-6)

    def test_stiffness_norm_monotone_in_r(self, small_run, small_bases):
        cfg, mesh, ops, snaps = small_run
        basis = small_bases["noDQ-L2"]
        rom = assemble_rom(basis, basis.d, mesh, ops, snaps.values[0])
        norms = [operator_norm_diagnostics(restrict_rom(rom, r))[0] for r in range(1, basis.d + 1)]
        assert np.all(np.diff(norms) >= -1e-9)
