import numpy as np
import pytest

from podburgers.fom import (
    FomConfig,
    ManufacturedSolution,
    NonlinearSolveFailure,
    cn_step,
    energy_identity_residuals,
    solve_fom,
    step_initial_condition,
)
from podburgers.mesh_fem import assemble_operators, build_mesh, inner_product, squared_norms


class TestConfig:
    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            FomConfig(nu=-1.0, dt=1e-3, t_final=1.0)
        with pytest.raises(ValueError):
            FomConfig(nu=1e-2, dt=2.0, t_final=1.0)
        with pytest.raises(ValueError):
            FomConfig(nu=1e-2, dt=3e-4, t_final=1.0)  # not an integer multiple

    def test_step_count(self):
        cfg = FomConfig(nu=1e-2, dt=1e-3, t_final=1.0)
        assert cfg.n_steps == 1000


class TestStepInitialCondition:
    def test_four_cells(self):
        # nodes (0.25, 0.5, 0.75): value 1 on the closed half-interval side
        assert np.array_equal(step_initial_condition(build_mesh(4)), [1.0, 1.0, 0.0])

    def test_two_cells(self):
        assert np.array_equal(step_initial_condition(build_mesh(2)), [1.0])

    def test_reference_mesh_counts(self):
        u0 = step_initial_condition(build_mesh(512))
        assert u0.shape == (511,)
        assert np.array_equal(u0[:256], np.ones(256))
        assert np.array_equal(u0[256:], np.zeros(255))


class TestCnStep:
    def test_zero_fixed_point(self):
        mesh = build_mesh(16)
        ops = assemble_operators(mesh)
        cfg = FomConfig(nu=1e-2, dt=1e-3, t_final=0.01)
        u = cn_step(np.zeros(15), cfg, ops, 0.0)
        assert np.allclose(u, 0.0, atol=1e-14)

    def test_energy_identity_single_step(self, rng):
        mesh = build_mesh(32)
        ops = assemble_operators(mesh)
        cfg = FomConfig(nu=5e-2, dt=1e-3, t_final=0.01)
        u_prev = rng.standard_normal(31)
        u_next = cn_step(u_prev, cfg, ops, 0.0)
        u_mid = 0.5 * (u_next + u_prev)
        lhs = inner_product(u_next, u_next, "L2", ops) - inner_product(u_prev, u_prev, "L2", ops)
        rhs = -2.0 * cfg.dt * cfg.nu * inner_product(u_mid, u_mid, "H01", ops)
        assert abs(lhs - rhs) < 10 * cfg.newton_tol

    def test_local_truncation_third_order(self):
        # one step from the exact profile: L2 error drops ~8x when dt halves
        mesh = build_mesh(512)
        ops = assemble_operators(mesh)
        ms = ManufacturedSolution()
        errs = []
        for dt in (0.04, 0.02):
            cfg = FomConfig(nu=1e-2, dt=dt, t_final=1.0, forcing=ms)
            u0 = ms.exact(mesh.interior_nodes, 0.0)
            u1 = cn_step(u0, cfg, ops, 0.0)
            e = u1 - ms.exact(mesh.interior_nodes, dt)
            errs.append(float(np.sqrt(squared_norms(e, "L2", ops)[0])))
        ratio = errs[0] / errs[1]
        assert 6.0 < ratio < 12.0

    def test_newton_failure_reports_residual(self):
        mesh = build_mesh(16)
        ops = assemble_operators(mesh)
        cfg = FomConfig(nu=1e-2, dt=1e-3, t_final=0.01, newton_max_iter=0)
        with pytest.raises(NonlinearSolveFailure) as excinfo:
            cn_step(np.ones(15), cfg, ops, 0.0)
        assert excinfo.value.residual > 0.0


class TestSolveFom:
    def test_zero_data_stays_zero(self):
        mesh = build_mesh(8)
        snaps = solve_fom(FomConfig(nu=1e-2, dt=1e-3, t_final=0.005), mesh, np.zeros(7))
        assert snaps.values.shape == (6, 7)
        assert np.all(snaps.values == 0.0)

    def test_snapshot_zero_is_initial_condition(self, small_run):
        _, mesh, _, snaps = small_run
        assert np.array_equal(snaps.values[0], step_initial_condition(mesh))

    def test_energy_decay(self, small_run):
        cfg, mesh, ops, snaps = small_run
        residuals = energy_identity_residuals(snaps, cfg.nu, ops)
        assert np.max(np.abs(residuals)) < 10 * cfg.newton_tol
        l2sq = squared_norms(snaps.values, "L2", ops)
        assert np.all(np.diff(l2sq) <= 1e-12)  # strictly non-increasing energy

    def test_determinism(self):
        mesh = build_mesh(16)
        cfg = FomConfig(nu=1e-2, dt=1e-3, t_final=0.02)
        u0 = step_initial_condition(mesh)
        a = solve_fom(cfg, mesh, u0)
        b = solve_fom(cfg, mesh, u0)
        assert np.array_equal(a.values, b.values)

    def test_failure_carries_step_index(self):
        mesh = build_mesh(16)
        cfg = FomConfig(nu=1e-2, dt=1e-3, t_final=0.01, newton_max_iter=0)
        with pytest.raises(NonlinearSolveFailure) as excinfo:
            solve_fom(cfg, mesh, step_initial_condition(mesh))
        assert excinfo.value.step == 1

    def test_snapshots_immutable(self, small_run):
        _, _, _, snaps = small_run
        with pytest.raises(ValueError):
            snaps.values[0, 0] = 42.0


class TestManufacturedSolution:
    def test_forcing_consistent_with_pde(self):
        # f = u_t - nu u_xx + u u_x checked by finite differences
        ms = ManufacturedSolution()
        nu = 3e-2
        x = np.linspace(0.05, 0.95, 19)
        t, eps = 0.4, 1e-5
        u_t = (ms.exact(x, t + eps) - ms.exact(x, t - eps)) / (2 * eps)
        u_x = (ms.exact(x + eps, t) - ms.exact(x - eps, t)) / (2 * eps)
        u_xx = (ms.exact(x + eps, t) - 2 * ms.exact(x, t) + ms.exact(x - eps, t)) / eps**2
        residual = u_t - nu * u_xx + ms.exact(x, t) * u_x - ms.forcing(x, t, nu)
        assert np.max(np.abs(residual)) < 1e-5

    def test_boundary_values_vanish(self):
        ms = ManufacturedSolution()
        assert ms.exact(np.array([0.0, 1.0]), 0.7) == pytest.approx([0.0, 0.0], abs=1e-15)
