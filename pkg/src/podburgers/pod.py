"""POD basis construction by the method of snapshots.

The basis minimizes the mean squared projection error of the snapshot
collection in the chosen inner product (L2 or H01). With difference
quotients enabled, the collection is augmented by the scaled differences
(u^k - u^{k-1})/dt and the averaging weight becomes 2N+1 instead of N+1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .fom import SnapshotSet
from .mesh_fem import INNER_PRODUCTS, FemOperators, apply_gram


class EmptyBasisError(ValueError):
    """The snapshot collection has no positive POD eigenvalues."""


@dataclass(frozen=True)
class PodConfig:
    inner_product: str = "L2"
    use_dq: bool = False
    eigenvalue_cutoff: float = 1e-12  # relative to the largest eigenvalue

    def __post_init__(self):
        if self.inner_product not in INNER_PRODUCTS:
            raise ValueError(f"unknown inner product {self.inner_product!r}")
        if not 0.0 < self.eigenvalue_cutoff < 1.0:
            raise ValueError("eigenvalue_cutoff must lie in (0, 1)")


@dataclass(frozen=True)
class PodBasis:
    """Orthonormal POD modes with their eigenvalues, sorted descending."""

    modes: np.ndarray  # (n_dof, d), columns orthonormal in the basis inner product
    eigenvalues: np.ndarray  # (d,)
    weight_m: int
    inner_product: str
    use_dq: bool

    def __post_init__(self):
        for name in ("modes", "eigenvalues"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def d(self) -> int:
        return self.modes.shape[1]

    @property
    def framework(self) -> str:
        return f"{'DQ' if self.use_dq else 'noDQ'}-{self.inner_product}"


def build_dq_collection(snaps: SnapshotSet, use_dq: bool) -> tuple[np.ndarray, int]:
    """Assemble the POD data collection and its averaging weight.

    Without difference quotients: the N+1 snapshots, weight N+1. With
    them: the snapshots followed by the N members (u^k - u^{k-1})/dt,
    weight 2N+1.
    """
    n_plus_1 = snaps.n_snapshots
    if n_plus_1 < 2:
        raise ValueError("need at least two snapshots (N >= 1)")
    if not use_dq:
        return snaps.values.copy(), n_plus_1
    dq = np.diff(snaps.values, axis=0) / snaps.dt
    return np.vstack([snaps.values, dq]), 2 * n_plus_1 - 1


def snapshot_gram(
    collection: np.ndarray, weight_m: int, kind: str, ops: FemOperators
) -> np.ndarray:
    """Weighted Gram matrix K_ab = (1/weight_m) (y_a, y_b)_H of the collection."""
    collection = np.asarray(collection, dtype=float)
    applied = apply_gram(collection.T, kind, ops)  # (n_dof, M)
    gram = collection @ applied
    gram += gram.T  # symmetrize exactly
    gram *= 0.5 / weight_m
    return gram


def _orthonormality_defect(modes: np.ndarray, kind: str, ops: FemOperators) -> float:
    gram = modes.T @ apply_gram(modes, kind, ops)
    return float(np.max(np.abs(gram - np.eye(modes.shape[1]))))


def _gram_schmidt(modes: np.ndarray, kind: str, ops: FemOperators) -> np.ndarray:
    """One modified Gram-Schmidt pass in the H inner product (with reorthogonalization)."""
    q = modes.copy()
    for i in range(q.shape[1]):
        for _ in range(2):
            if i:
                coeffs = q[:, :i].T @ apply_gram(q[:, i], kind, ops)
                q[:, i] -= q[:, :i] @ coeffs
        nrm = np.sqrt(q[:, i] @ apply_gram(q[:, i], kind, ops))
        if nrm == 0.0:
            raise EmptyBasisError(f"mode {i} collapsed during orthonormalization")
        q[:, i] /= nrm
    return q


def compute_pod(
    collection: np.ndarray,
    weight_m: int,
    cfg: PodConfig,
    ops: FemOperators,
) -> PodBasis:
    """Build the POD basis from a snapshot collection.

    Method of snapshots: eigendecompose the weighted Gram matrix, keep the
    eigenvalues above cfg.eigenvalue_cutoff relative to the largest one,
    and reconstruct the modes as phi_i = sum_a v_a^(i) y_a / sqrt(M lam_i).

    Raises EmptyBasisError if no eigenvalue survives (all-zero data).
    """
    collection = np.asarray(collection, dtype=float)
    if collection.ndim != 2 or collection.shape[0] == 0:
        raise ValueError("collection must be a nonempty (M, n_dof) array")
    if collection.shape[0] != weight_m:
        raise ValueError(
            f"collection has {collection.shape[0]} members but weight_m = {weight_m}"
        )
    gram = snapshot_gram(collection, weight_m, cfg.inner_product, ops)
    evals, evecs = scipy.linalg.eigh(gram)
    evals = evals[::-1]
    evecs = evecs[:, ::-1]
    if evals[0] <= 0.0:
        raise EmptyBasisError("snapshot collection has no positive POD eigenvalues")
    d = int(np.sum(evals > cfg.eigenvalue_cutoff * evals[0]))
    lam = evals[:d].copy()
    modes = collection.T @ (evecs[:, :d] / np.sqrt(weight_m * lam))
    if _orthonormality_defect(modes, cfg.inner_product, ops) > 1e-10:
        modes = _gram_schmidt(modes, cfg.inner_product, ops)
    return PodBasis(
        modes=modes,
        eigenvalues=lam,
        weight_m=int(weight_m),
        inner_product=cfg.inner_product,
        use_dq=cfg.use_dq,
    )


def orthonormality_defect(basis: PodBasis, ops: FemOperators) -> float:
    """Max entrywise deviation of the mode Gram matrix from the identity."""
    return _orthonormality_defect(basis.modes, basis.inner_product, ops)


def pod_project(u: np.ndarray, basis: PodBasis, r: int, ops: FemOperators) -> np.ndarray:
    """Orthogonal projection onto the first r modes in the basis inner product.

    Accepts a single FEM function (n_dof,) or a stack (m, n_dof) of them.
    """
    _check_rank(basis, r)
    u = np.asarray(u, dtype=float)
    phi = basis.modes[:, :r]
    coeffs = apply_gram(u.T, basis.inner_product, ops).T @ phi
    return coeffs @ phi.T


def pod_coefficients(u: np.ndarray, basis: PodBasis, r: int, ops: FemOperators) -> np.ndarray:
    """Expansion coefficients (u, phi_i)_H, i = 1..r."""
    _check_rank(basis, r)
    u = np.asarray(u, dtype=float)
    return basis.modes[:, :r].T @ apply_gram(u, basis.inner_product, ops)


def tail_sum(basis: PodBasis, r: int) -> float:
    """Sum of the discarded eigenvalues lambda_{r+1} + ... + lambda_d."""
    if not 0 <= r <= basis.d:
        raise ValueError(f"r = {r} out of range 0..{basis.d}")
    return float(np.sum(basis.eigenvalues[r:]))


def _check_rank(basis: PodBasis, r: int) -> None:
    if not 1 <= r <= basis.d:
        raise ValueError(f"r = {r} out of range 1..{basis.d}")
