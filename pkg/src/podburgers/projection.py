"""Projections onto the reduced space and their error identities.

Besides the POD projection itself, two more projections onto the span of
the first r modes are needed: the Ritz projection (orthogonal in the H01
semi-inner product) and the W-orthogonal projection for W in {L2, H01}.
All reduce to small r x r symmetric positive definite solves.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

from .mesh_fem import H01, L2, FemOperators, apply_gram, squared_norms
from .pod import PodBasis, _check_rank, pod_project

POD = "pod"
RITZ = "ritz"
WORTH_L2 = "worth_l2"
WORTH_H01 = "worth_h01"
PROJECTION_KINDS = (POD, RITZ, WORTH_L2, WORTH_H01)

CONDITION_LIMIT = 1e14


def reduced_gram(basis: PodBasis, r: int, kind: str, ops: FemOperators) -> np.ndarray:
    """r x r Gram matrix of the first r modes in the given inner product."""
    phi = basis.modes[:, :r]
    gram = phi.T @ apply_gram(phi, kind, ops)
    return 0.5 * (gram + gram.T)


def _guarded_solve(gram: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    evals = scipy.linalg.eigvalsh(gram)
    if evals[0] <= 0.0 or evals[-1] / evals[0] > CONDITION_LIMIT:
        cond = np.inf if evals[0] <= 0.0 else evals[-1] / evals[0]
        warnings.warn(
            f"{what}: reduced Gram condition number {cond:.2e} exceeds "
            f"{CONDITION_LIMIT:.0e}; results may be inaccurate",
            RuntimeWarning,
            stacklevel=3,
        )
        return scipy.linalg.solve(gram, rhs, assume_a="sym")
    c, low = scipy.linalg.cho_factor(gram)
    return scipy.linalg.cho_solve((c, low), rhs)


def _galerkin_project(
    u: np.ndarray, basis: PodBasis, r: int, kind: str, ops: FemOperators, what: str
) -> np.ndarray:
    """Projection onto span(phi_1..phi_r) orthogonal in the `kind` inner product."""
    _check_rank(basis, r)
    u = np.asarray(u, dtype=float)
    phi = basis.modes[:, :r]
    rhs = phi.T @ apply_gram(u.T, kind, ops)  # (r,) or (r, m)
    gram = reduced_gram(basis, r, kind, ops)
    coeffs = _guarded_solve(gram, rhs, what)
    return (phi @ coeffs).T if u.ndim == 2 else phi @ coeffs


def ritz_project(u: np.ndarray, basis: PodBasis, r: int, ops: FemOperators) -> np.ndarray:
    """Ritz projection: ((u - R_r u)_x, (v_r)_x)_{L2} = 0 for all v_r in the span.

    Accepts a single FEM function (n_dof,) or a stack (m, n_dof).
    """
    return _galerkin_project(u, basis, r, H01, ops, "ritz_project")


def w_orth_project(
    u: np.ndarray, basis: PodBasis, r: int, w: str, ops: FemOperators
) -> np.ndarray:
    """W-orthogonal projection onto the span of the first r modes, W in {L2, H01}."""
    return _galerkin_project(u, basis, r, w, ops, f"w_orth_project[{w}]")


def project(
    u: np.ndarray, basis: PodBasis, r: int, kind: str, ops: FemOperators
) -> np.ndarray:
    """Dispatch over the four projection kinds onto the first r modes."""
    if kind == POD:
        return pod_project(u, basis, r, ops)
    if kind == RITZ:
        return ritz_project(u, basis, r, ops)
    if kind == WORTH_L2:
        return w_orth_project(u, basis, r, L2, ops)
    if kind == WORTH_H01:
        return w_orth_project(u, basis, r, H01, ops)
    raise ValueError(f"unknown projection kind {kind!r}")


def ritz_deflation_norms(basis: PodBasis, r: int, ops: FemOperators) -> np.ndarray:
    """Per-mode Ritz deflation norms for the discarded modes.

    Returns an array of shape (d - r, 2) whose row i - r - 1 holds
    (||phi_i - R_r phi_i||_{L2}, ||(phi_i - R_r phi_i)_x||_{L2}) for
    i = r+1..d. For an H01 basis the Ritz projection annihilates the tail
    modes, so the second column is identically 1 and the first equals
    ||phi_i||_{L2}.
    """
    _check_rank(basis, r)
    tail = basis.modes[:, r:].T  # (d - r, n_dof)
    if tail.shape[0] == 0:
        return np.zeros((0, 2))
    deflated = tail - ritz_project(tail, basis, r, ops)
    l2 = np.sqrt(np.maximum(squared_norms(deflated, L2, ops), 0.0))
    h01 = np.sqrt(np.maximum(squared_norms(deflated, H01, ops), 0.0))
    return np.column_stack([l2, h01])


def _project_or_zero(
    u: np.ndarray, basis: PodBasis, r: int, kind: str, ops: FemOperators
) -> np.ndarray:
    if r == 0:
        return np.zeros_like(np.asarray(u, dtype=float))
    return project(u, basis, r, kind, ops)


def projection_error_tail_identity(
    collection: np.ndarray,
    basis: PodBasis,
    r: int,
    proj: str,
    w: str,
    ops: FemOperators,
) -> tuple[float, float]:
    """Both sides of the weighted projection-error identity.

    lhs = (1/weight_m) sum over the collection of ||y - Q y||_W^2,
    rhs = sum_{i>r} lambda_i ||phi_i - Q phi_i||_W^2,
    for Q the chosen projection onto the span of the first r modes (the
    zero map for r = 0). The two agree for any bounded linear projection
    whenever the collection is the one the basis was built from.
    """
    collection = np.asarray(collection, dtype=float)
    if collection.shape[0] != basis.weight_m:
        raise ValueError(
            f"collection has {collection.shape[0]} members, basis weight is {basis.weight_m}"
        )
    if not 0 <= r <= basis.d:
        raise ValueError(f"r = {r} out of range 0..{basis.d}")
    residual = collection - _project_or_zero(collection, basis, r, proj, ops)
    lhs = float(np.sum(squared_norms(residual, w, ops))) / basis.weight_m
    if r == basis.d:
        return lhs, 0.0
    tail = basis.modes[:, r:].T
    deflated = tail - _project_or_zero(tail, basis, r, proj, ops)
    rhs = float(basis.eigenvalues[r:] @ squared_norms(deflated, w, ops))
    return lhs, rhs
