"""Uniform 1D P1 finite elements on (0,1) with homogeneous Dirichlet conditions.

Only interior degrees of freedom are stored; the boundary values are
identically zero and never enter any coefficient vector. A "FEM function"
throughout this package is a plain 1D numpy array of nodal values at the
interior nodes x_j = j*h, j = 1..n_cells-1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

L2 = "L2"
H01 = "H01"
INNER_PRODUCTS = (L2, H01)

# 2-point Gauss rule on the reference cell [0,1]: exact for cubics, hence
# exact for the piecewise-quadratic integrand u*u_x*phi of P1 functions.
_GAUSS2 = (
    (0.5 - 0.5 / np.sqrt(3.0), 0.5),
    (0.5 + 0.5 / np.sqrt(3.0), 0.5),
)


@dataclass(frozen=True)
class Mesh1D:
    """Uniform mesh of (0,1) with n_cells cells and n_cells-1 interior nodes."""

    n_cells: int

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells

    @property
    def n_dof(self) -> int:
        return self.n_cells - 1

    @property
    def interior_nodes(self) -> np.ndarray:
        return np.arange(1, self.n_cells) * self.h

    @property
    def all_nodes(self) -> np.ndarray:
        return np.arange(self.n_cells + 1) * self.h


def build_mesh(n_cells: int) -> Mesh1D:
    """Build a uniform mesh with h = 1/n_cells. Requires n_cells >= 2."""
    if n_cells < 2:
        raise ValueError(f"need at least 2 cells for one interior node, got {n_cells}")
    return Mesh1D(n_cells=int(n_cells))


@dataclass(frozen=True)
class FemOperators:
    """P1 mass and stiffness Gram matrices, stored as symmetric tridiagonals.

    The mass matrix realizes the L2 inner product of hat functions
    (row pattern h/6, 4h/6, h/6), the stiffness matrix the H01 inner
    product (u, v)_{H01} = (u_x, v_x)_{L2} (row pattern -1/h, 2/h, -1/h).
    """

    mesh: Mesh1D
    mass_main: np.ndarray
    mass_off: np.ndarray
    stiff_main: np.ndarray
    stiff_off: np.ndarray

    @property
    def dim(self) -> int:
        return self.mesh.n_dof

    def diagonals(self, kind: str) -> tuple[np.ndarray, np.ndarray]:
        if kind == L2:
            return self.mass_main, self.mass_off
        if kind == H01:
            return self.stiff_main, self.stiff_off
        raise ValueError(f"unknown inner product kind {kind!r}")

    def mass_dense(self) -> np.ndarray:
        return _tridiag_dense(self.mass_main, self.mass_off)

    def stiff_dense(self) -> np.ndarray:
        return _tridiag_dense(self.stiff_main, self.stiff_off)


def _tridiag_dense(main: np.ndarray, off: np.ndarray) -> np.ndarray:
    return np.diag(main) + np.diag(off, 1) + np.diag(off, -1)


def _tridiag_apply(main: np.ndarray, off: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Apply a symmetric tridiagonal matrix along axis 0 of a 1D or 2D array."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 2:
        main = main[:, None]
        off = off[:, None]
    out = main * u
    out[:-1] += off * u[1:]
    out[1:] += off * u[:-1]
    return out


def assemble_operators(mesh: Mesh1D) -> FemOperators:
    """Assemble exact P1 mass and stiffness matrices for the interior nodes."""
    n = mesh.n_dof
    h = mesh.h
    return FemOperators(
        mesh=mesh,
        mass_main=np.full(n, 4.0 * h / 6.0),
        mass_off=np.full(n - 1, h / 6.0),
        stiff_main=np.full(n, 2.0 / h),
        stiff_off=np.full(n - 1, -1.0 / h),
    )


def apply_gram(u: np.ndarray, kind: str, ops: FemOperators) -> np.ndarray:
    """Matrix-vector product with the mass (L2) or stiffness (H01) matrix."""
    main, off = ops.diagonals(kind)
    u = np.asarray(u, dtype=float)
    if u.shape[0] != ops.dim:
        raise ValueError(f"dimension mismatch: expected {ops.dim}, got {u.shape[0]}")
    return _tridiag_apply(main, off, u)


def inner_product(u: np.ndarray, v: np.ndarray, kind: str, ops: FemOperators) -> float:
    """L2 or H01 inner product of two FEM functions, u^T G v."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.shape[0] != ops.dim:
        raise ValueError(
            f"dimension mismatch: u {u.shape}, v {v.shape}, operators dim {ops.dim}"
        )
    return float(u @ apply_gram(v, kind, ops))


def norm(u: np.ndarray, kind: str, ops: FemOperators) -> float:
    """L2 or H01 norm of a FEM function."""
    return float(np.sqrt(max(inner_product(u, u, kind, ops), 0.0)))


def squared_norms(stack: np.ndarray, kind: str, ops: FemOperators) -> np.ndarray:
    """Row-wise squared norms of a (m, n_dof) stack of FEM functions."""
    stack = np.asarray(stack, dtype=float)
    if stack.ndim == 1:
        stack = stack[None, :]
    applied = apply_gram(stack.T, kind, ops)
    return np.einsum("mn,nm->m", stack, applied)


def nonlinear_form(u: np.ndarray, mesh: Mesh1D) -> np.ndarray:
    """Assemble the Burgers convection vector N(u)_i = int u u_x phi_i dx.

    Uses per-cell 2-point Gauss quadrature, exact for the degree-2
    integrand, so the discrete antisymmetry sum_i u_i N(u)_i = 0 holds to
    rounding.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (mesh.n_dof,):
        raise ValueError(f"expected shape ({mesh.n_dof},), got {u.shape}")
    h = mesh.h
    ub = np.zeros(mesh.n_cells + 1)
    ub[1:-1] = u
    slope = np.diff(ub) / h
    left = np.zeros(mesh.n_cells)
    right = np.zeros(mesh.n_cells)
    for xi, w in _GAUSS2:
        uq = ub[:-1] * (1.0 - xi) + ub[1:] * xi
        common = (w * h) * uq * slope
        left += common * (1.0 - xi)
        right += common * xi
    out = np.zeros(mesh.n_dof)
    out += right[: mesh.n_cells - 1]
    out += left[1:]
    return out


def nonlinear_jacobian(u: np.ndarray, mesh: Mesh1D) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tridiagonal Jacobian dN/du of the convection vector.

    Returns (sub, main, sup) diagonals; the matrix is not symmetric.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (mesh.n_dof,):
        raise ValueError(f"expected shape ({mesh.n_dof},), got {u.shape}")
    ub = np.zeros(mesh.n_cells + 1)
    ub[1:-1] = u
    main = (ub[2:] - ub[:-2]) / 6.0
    inner_l = ub[1:-2]
    inner_r = ub[2:-1]
    sub = -(2.0 * inner_l + inner_r) / 6.0
    sup = (inner_l + 2.0 * inner_r) / 6.0
    return sub, main, sup


def assemble_load(f, mesh: Mesh1D, n_gauss: int = 4) -> np.ndarray:
    """Load vector F_i = int f(x) phi_i dx by per-cell Gauss quadrature."""
    pts, wts = np.polynomial.legendre.leggauss(n_gauss)
    pts = 0.5 * (pts + 1.0)
    wts = 0.5 * wts
    h = mesh.h
    x_left = np.arange(mesh.n_cells) * h
    left = np.zeros(mesh.n_cells)
    right = np.zeros(mesh.n_cells)
    for xi, w in zip(pts, wts):
        fq = np.asarray(f(x_left + xi * h), dtype=float)
        left += (w * h) * fq * (1.0 - xi)
        right += (w * h) * fq * xi
    out = np.zeros(mesh.n_dof)
    out += right[: mesh.n_cells - 1]
    out += left[1:]
    return out
