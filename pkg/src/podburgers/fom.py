"""Full-order Crank-Nicolson solver for the viscous Burgers equation.

Time stepping uses the midpoint convention: the implicit system couples
the nonlinear terms through u^{n+1/2} = (u^{n+1} + u^n)/2, and any forcing
is evaluated at t_n + dt/2. Each step is solved by Newton's method with
the analytic tridiagonal Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .mesh_fem import (
    FemOperators,
    Mesh1D,
    apply_gram,
    assemble_load,
    assemble_operators,
    nonlinear_form,
    nonlinear_jacobian,
    squared_norms,
)


class NonlinearSolveFailure(RuntimeError):
    """Newton iteration failed to reach the residual tolerance."""

    def __init__(self, message: str, residual: float, step: int | None = None):
        super().__init__(message)
        self.residual = residual
        self.step = step


@dataclass(frozen=True)
class ManufacturedSolution:
    """Exact solution u(x,t) = exp(-t) sin(pi x) with its matching forcing.

    Substituting into u_t - nu u_xx + u u_x gives
    f = exp(-t) sin(pi x) (nu pi^2 - 1) + pi exp(-2t) sin(pi x) cos(pi x).
    """

    name: str = "exp_sin"

    def exact(self, x: np.ndarray, t: float) -> np.ndarray:
        return np.exp(-t) * np.sin(np.pi * np.asarray(x, dtype=float))

    def forcing(self, x: np.ndarray, t: float, nu: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        s = np.sin(np.pi * x)
        return np.exp(-t) * s * (nu * np.pi**2 - 1.0) + np.pi * np.exp(-2.0 * t) * s * np.cos(
            np.pi * x
        )


@dataclass(frozen=True)
class FomConfig:
    """Time-stepping configuration. forcing=None means f = 0."""

    nu: float
    dt: float
    t_final: float
    newton_tol: float = 1e-12
    newton_max_iter: int = 30
    forcing: ManufacturedSolution | None = None

    def __post_init__(self):
        if self.nu <= 0 or self.dt <= 0 or self.t_final <= 0:
            raise ValueError("nu, dt and t_final must be positive")
        if self.dt > self.t_final:
            raise ValueError("dt must not exceed t_final")
        n = round(self.t_final / self.dt)
        if abs(n * self.dt - self.t_final) > 1e-12 * self.t_final:
            raise ValueError(
                f"t_final = {self.t_final} is not an integer multiple of dt = {self.dt}"
            )

    @property
    def n_steps(self) -> int:
        return round(self.t_final / self.dt)


@dataclass(frozen=True)
class SnapshotSet:
    """Time-indexed solution coefficients: row n holds u^n at t = n*dt."""

    dt: float
    values: np.ndarray  # (N+1, n_dof)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_snapshots(self) -> int:
        return self.values.shape[0]

    @property
    def n_dof(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_snapshots) * self.dt


def step_initial_condition(mesh: Mesh1D) -> np.ndarray:
    """Nodal interpolation of the half-domain step: 1 on (0, 1/2], 0 on (1/2, 1)."""
    return np.where(mesh.interior_nodes <= 0.5, 1.0, 0.0)


def _cn_residual(
    u: np.ndarray,
    u_prev: np.ndarray,
    cfg: FomConfig,
    ops: FemOperators,
    load: np.ndarray,
) -> np.ndarray:
    u_mid = 0.5 * (u + u_prev)
    res = apply_gram(u - u_prev, "L2", ops) / cfg.dt
    res += cfg.nu * apply_gram(u_mid, "H01", ops)
    res += nonlinear_form(u_mid, ops.mesh)
    res -= load
    return res


def cn_step(
    u_prev: np.ndarray,
    cfg: FomConfig,
    ops: FemOperators,
    t_n: float,
) -> np.ndarray:
    """Advance one Crank-Nicolson step from u^n at time t_n.

    Solves M (u - u_prev)/dt + nu S u_mid + N(u_mid) = F(t_n + dt/2) for u
    by Newton iteration, with u_mid = (u + u_prev)/2.
    """
    mesh = ops.mesh
    if cfg.forcing is None:
        load = np.zeros(mesh.n_dof)
    else:
        t_mid = t_n + 0.5 * cfg.dt
        load = assemble_load(lambda x: cfg.forcing.forcing(x, t_mid, cfg.nu), mesh)

    n = mesh.n_dof
    u = u_prev.astype(float, copy=True)
    ab = np.zeros((3, n))
    residual_norm = np.inf
    for it in range(cfg.newton_max_iter + 1):
        res = _cn_residual(u, u_prev, cfg, ops, load)
        residual_norm = float(np.linalg.norm(res))
        if residual_norm <= cfg.newton_tol:
            return u
        if it == cfg.newton_max_iter:
            break
        u_mid = 0.5 * (u + u_prev)
        sub, main, sup = nonlinear_jacobian(u_mid, mesh)
        off = ops.mass_off / cfg.dt + 0.5 * cfg.nu * ops.stiff_off
        ab[0, 1:] = off + 0.5 * sup
        ab[1, :] = ops.mass_main / cfg.dt + 0.5 * cfg.nu * ops.stiff_main + 0.5 * main
        ab[2, :-1] = off + 0.5 * sub
        if n == 1:
            u = u - res / ab[1, 0]
        else:
            u = u - solve_banded((1, 1), ab, res)
    raise NonlinearSolveFailure(
        f"Newton failed to reach {cfg.newton_tol:g} in {cfg.newton_max_iter} "
        f"iterations (final residual {residual_norm:.3e})",
        residual=residual_norm,
    )


def solve_fom(cfg: FomConfig, mesh: Mesh1D, u0: np.ndarray, ops: FemOperators | None = None) -> SnapshotSet:
    """Run the full-order solve and return all N+1 snapshots, u^0 = u0."""
    if ops is None:
        ops = assemble_operators(mesh)
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (mesh.n_dof,):
        raise ValueError(f"initial condition shape {u0.shape} does not match mesh")
    n_steps = cfg.n_steps
    values = np.empty((n_steps + 1, mesh.n_dof))
    values[0] = u0
    u = u0
    for n in range(n_steps):
        try:
            u = cn_step(u, cfg, ops, n * cfg.dt)
        except NonlinearSolveFailure as exc:
            raise NonlinearSolveFailure(
                f"step {n + 1}: {exc}", residual=exc.residual, step=n + 1
            ) from exc
        values[n + 1] = u
    return SnapshotSet(dt=cfg.dt, values=values)


def energy_identity_residuals(snaps: SnapshotSet, nu: float, ops: FemOperators) -> np.ndarray:
    """Per-step defect of the discrete L2 energy balance for f = 0.

    For the exact Crank-Nicolson solution each entry of
    ||u^{n+1}||_{L2}^2 - ||u^n||_{L2}^2 + 2 dt nu ||u^{n+1/2}||_{H01}^2
    vanishes; the return value measures how well the computed snapshots
    satisfy it.
    """
    vals = snaps.values
    l2sq = squared_norms(vals, "L2", ops)
    mids = 0.5 * (vals[1:] + vals[:-1])
    h01sq = squared_norms(mids, "H01", ops)
    return np.diff(l2sq) + 2.0 * snaps.dt * nu * h01sq
