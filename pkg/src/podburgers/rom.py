"""Galerkin reduced-order model of Burgers with Crank-Nicolson stepping.

The reduced operators are assembled once by exact quadrature: an r x r
mass matrix, an r x r stiffness matrix and the dense rank-3 convection
tensor B[i,j,k] = int phi_j (phi_k)_x phi_i dx. The forcing is zero on
the reduced path; manufactured forcing exists only for full-order
verification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fom import NonlinearSolveFailure, SnapshotSet
from .mesh_fem import FemOperators, Mesh1D, _GAUSS2, apply_gram
from .pod import PodBasis, pod_coefficients, _check_rank
from .projection import _guarded_solve, reduced_gram


@dataclass(frozen=True)
class RomOperators:
    """Reduced operators for a fixed dimension r."""

    r: int
    mass_r: np.ndarray  # (r, r)
    stiff_r: np.ndarray  # (r, r)
    tensor: np.ndarray  # (r, r, r), B[i,j,k] = int phi_j (phi_k)_x phi_i
    a0: np.ndarray  # (r,) initial reduced coefficients


@dataclass(frozen=True)
class RomTrajectory:
    dt: float
    coefficients: np.ndarray  # (n_steps+1, r)

    @property
    def r(self) -> int:
        return self.coefficients.shape[1]

    @property
    def n_steps(self) -> int:
        return self.coefficients.shape[0] - 1


@dataclass(frozen=True)
class TimestepCheck:
    """Advisory record for the dt-vs-viscosity smallness condition."""

    dt: float
    nu: float
    max_midpoint_l2: float
    c_value: float  # (max ||u_r^{n+1/2}||_{L2})^{-4}, inf for a zero trajectory
    bound_relaxed: float  # 4 C nu^3 / 27
    bound_tight: float  # 2 C nu^3 / 27
    satisfied_relaxed: bool
    satisfied_tight: bool


def convection_tensor(modes: np.ndarray, mesh: Mesh1D) -> np.ndarray:
    """Dense rank-3 Galerkin convection tensor by per-cell 2-point Gauss."""
    r = modes.shape[1]
    padded = np.zeros((mesh.n_cells + 1, r))
    padded[1:-1] = modes
    slopes = np.diff(padded, axis=0) / mesh.h  # (n_cells, r)
    overlap = np.zeros((mesh.n_cells, r, r))
    for xi, w in _GAUSS2:
        vals = padded[:-1] * (1.0 - xi) + padded[1:] * xi
        overlap += (w * mesh.h) * vals[:, :, None] * vals[:, None, :]
    return np.einsum("cij,ck->ijk", overlap, slopes)


def initial_coefficients(
    basis: PodBasis,
    r: int,
    ops: FemOperators,
    u0: np.ndarray,
    initial_projection: str = "pod",
) -> np.ndarray:
    """Reduced initial condition: basis-inner-product or Ritz projection of u0."""
    _check_rank(basis, r)
    if initial_projection == "pod":
        return pod_coefficients(u0, basis, r, ops)
    if initial_projection == "ritz":
        rhs = basis.modes[:, :r].T @ apply_gram(np.asarray(u0, dtype=float), "H01", ops)
        return _guarded_solve(
            reduced_gram(basis, r, "H01", ops), rhs, "initial_coefficients[ritz]"
        )
    raise ValueError(f"unknown initial projection {initial_projection!r}")


def assemble_rom(
    basis: PodBasis,
    r: int,
    mesh: Mesh1D,
    ops: FemOperators,
    u0: np.ndarray,
    initial_projection: str = "pod",
) -> RomOperators:
    """Assemble reduced operators and the initial coefficient vector.

    The initial condition is projected onto the reduced space in the
    basis inner product by default; initial_projection="ritz" switches to
    the Ritz projection instead.
    """
    _check_rank(basis, r)
    phi = basis.modes[:, :r]
    mass_r = reduced_gram(basis, r, "L2", ops)
    stiff_r = reduced_gram(basis, r, "H01", ops)
    tensor = convection_tensor(phi, mesh)
    a0 = initial_coefficients(basis, r, ops, u0, initial_projection)
    return RomOperators(r=r, mass_r=mass_r, stiff_r=stiff_r, tensor=tensor, a0=a0)


def restrict_rom(rom_ops: RomOperators, r: int) -> RomOperators:
    """Leading r x r x r sub-blocks of the reduced operators.

    Identical to assembling at the smaller r for the operators; slicing
    a0 is exact only for the nested basis-inner-product initialization.
    Recompute a0 via initial_coefficients for the Ritz variant.
    """
    if not 1 <= r <= rom_ops.r:
        raise ValueError(f"r = {r} out of range 1..{rom_ops.r}")
    return RomOperators(
        r=r,
        mass_r=rom_ops.mass_r[:r, :r],
        stiff_r=rom_ops.stiff_r[:r, :r],
        tensor=rom_ops.tensor[:r, :r, :r],
        a0=rom_ops.a0[:r],
    )


def rom_step(
    a_prev: np.ndarray,
    rom_ops: RomOperators,
    nu: float,
    dt: float,
    newton_tol: float = 1e-12,
    newton_max_iter: int = 30,
) -> np.ndarray:
    """One Crank-Nicolson step of the reduced system (f = 0), by Newton."""
    mass, stiff, tensor = rom_ops.mass_r, rom_ops.stiff_r, rom_ops.tensor
    a = a_prev.astype(float, copy=True)
    residual_norm = np.inf
    for it in range(newton_max_iter + 1):
        a_mid = 0.5 * (a + a_prev)
        t_mid = tensor @ a_mid  # (i, j) = sum_k B[i,j,k] a_k
        res = mass @ (a - a_prev) / dt + nu * (stiff @ a_mid) + t_mid @ a_mid
        residual_norm = float(np.linalg.norm(res))
        if residual_norm <= newton_tol:
            return a
        if it == newton_max_iter:
            break
        t_alt = np.tensordot(tensor, a_mid, axes=([1], [0]))  # (i, k) = sum_j B a_j
        jac = mass / dt + 0.5 * nu * stiff + 0.5 * (t_mid + t_alt)
        a = a - np.linalg.solve(jac, res)
    raise NonlinearSolveFailure(
        f"reduced Newton failed to reach {newton_tol:g} in {newton_max_iter} "
        f"iterations (final residual {residual_norm:.3e})",
        residual=residual_norm,
    )


def solve_rom(
    rom_ops: RomOperators,
    nu: float,
    dt: float,
    n_steps: int,
    newton_tol: float = 1e-12,
    newton_max_iter: int = 30,
) -> RomTrajectory:
    """Integrate the reduced model from a0 for n_steps steps."""
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    coeffs = np.empty((n_steps + 1, rom_ops.r))
    coeffs[0] = rom_ops.a0
    a = rom_ops.a0
    for n in range(n_steps):
        try:
            a = rom_step(a, rom_ops, nu, dt, newton_tol, newton_max_iter)
        except NonlinearSolveFailure as exc:
            raise NonlinearSolveFailure(
                f"step {n + 1}: {exc}", residual=exc.residual, step=n + 1
            ) from exc
        coeffs[n + 1] = a
    return RomTrajectory(dt=dt, coefficients=coeffs)


def lift(traj: RomTrajectory, basis: PodBasis, r: int) -> SnapshotSet:
    """Expand reduced coefficients back to FEM functions."""
    _check_rank(basis, r)
    if traj.coefficients.shape[1] != r:
        raise ValueError(
            f"trajectory has {traj.coefficients.shape[1]} coefficients, expected {r}"
        )
    return SnapshotSet(dt=traj.dt, values=traj.coefficients @ basis.modes[:, :r].T)


def rom_energy_residuals(traj: RomTrajectory, rom_ops: RomOperators, nu: float) -> np.ndarray:
    """Per-step defect of the reduced L2 energy balance (f = 0)."""
    a = traj.coefficients
    l2sq = np.einsum("ni,ij,nj->n", a, rom_ops.mass_r, a)
    mids = 0.5 * (a[1:] + a[:-1])
    h01sq = np.einsum("ni,ij,nj->n", mids, rom_ops.stiff_r, mids)
    return np.diff(l2sq) + 2.0 * traj.dt * nu * h01sq


def timestep_restriction_check(
    nu: float, dt: float, traj: RomTrajectory, rom_ops: RomOperators
) -> TimestepCheck:
    """Evaluate the advisory smallness condition dt < 4 C nu^3 / 27.

    C = (max_n ||u_r^{n+1/2}||_{L2})^{-4}; a zero trajectory gives C = inf
    and the condition counts as satisfied. The stricter variant
    dt <= 2 C nu^3 / 27 is reported alongside. Never raises.
    """
    a = traj.coefficients
    mids = 0.5 * (a[1:] + a[:-1])
    l2sq = np.einsum("ni,ij,nj->n", mids, rom_ops.mass_r, mids)
    max_mid = float(np.sqrt(max(np.max(l2sq), 0.0))) if len(l2sq) else 0.0
    c_value = np.inf if max_mid == 0.0 else max_mid**-4
    bound_relaxed = 4.0 * c_value * nu**3 / 27.0
    bound_tight = 2.0 * c_value * nu**3 / 27.0
    return TimestepCheck(
        dt=dt,
        nu=nu,
        max_midpoint_l2=max_mid,
        c_value=c_value,
        bound_relaxed=bound_relaxed,
        bound_tight=bound_tight,
        satisfied_relaxed=bool(dt < bound_relaxed),
        satisfied_tight=bool(dt <= bound_tight),
    )
