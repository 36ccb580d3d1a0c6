"""Experiment orchestration: configs, FOM runs, basis sweeps, solution cuts.

A single ExperimentConfig drives every command. The default values mirror
the reference study: unit interval with 512 cells, nu = 1e-2, dt = 1e-3,
final time 1, zero forcing, half-domain step initial condition, and the
four basis frameworks noDQ/DQ x L2/H01.
"""

from __future__ import annotations

import dataclasses
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from .analysis import (
    ErrorReport,
    RegressionResult,
    compute_errors,
    compute_eta,
    compute_rhs_terms,
    default_regression_range,
    operator_norm_diagnostics,
    optimality_benchmarks,
    regression_order,
)
from .fom import FomConfig, SnapshotSet, solve_fom, step_initial_condition
from .mesh_fem import (
    FemOperators,
    L2,
    Mesh1D,
    assemble_operators,
    build_mesh,
    squared_norms,
)
from .pod import PodBasis, PodConfig, build_dq_collection, compute_pod, tail_sum
from .projection import ritz_project
from .rom import (
    RomOperators,
    assemble_rom,
    initial_coefficients,
    lift,
    restrict_rom,
    solve_rom,
    timestep_restriction_check,
)

FRAMEWORKS = ("noDQ-L2", "noDQ-H01", "DQ-L2", "DQ-H01")


@dataclass(frozen=True)
class ExperimentConfig:
    n_cells: int = 512
    nu: float = 1e-2
    dt: float = 1e-3
    t_final: float = 1.0
    newton_tol: float = 1e-12
    newton_max_iter: int = 30
    eigenvalue_cutoff: float = 1e-12
    frameworks: tuple[str, ...] = FRAMEWORKS
    r_list: tuple[int, ...] | None = None
    r_range: tuple[int, int] = (2, 40)
    i_u_constant: float = 0.0
    regression_abscissa: str = "tail"  # "tail" | "rhs1" | "rhs2"
    regression_r_range: tuple[int, int] | None = None
    benchmark_w: str = "L2"
    initial_projection: str = "pod"
    solution_times: tuple[float, ...] = (1.0,)
    solution_r: tuple[int, ...] = (5, 13)
    figures: bool = True
    workers: int = 4
    out_dir: str = "results"

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError("n_cells must be at least 2")
        if self.nu <= 0 or self.dt <= 0 or self.t_final <= 0:
            raise ValueError("nu, dt and t_final must be positive")
        for fw in self.frameworks:
            if fw not in FRAMEWORKS:
                raise ValueError(f"unknown framework {fw!r}; choose from {FRAMEWORKS}")
        if self.regression_abscissa not in ("tail", "rhs1", "rhs2"):
            raise ValueError(f"unknown regression abscissa {self.regression_abscissa!r}")
        if self.r_list is None and self.r_range[0] < 1:
            raise ValueError("r_range must start at 1 or above")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    def resolved_r_list(self) -> list[int]:
        if self.r_list is not None:
            return sorted(set(int(r) for r in self.r_list))
        lo, hi = self.r_range
        return list(range(lo, hi + 1))

    def fom_config(self) -> FomConfig:
        return FomConfig(
            nu=self.nu,
            dt=self.dt,
            t_final=self.t_final,
            newton_tol=self.newton_tol,
            newton_max_iter=self.newton_max_iter,
        )

    def to_dict(self) -> dict:
        raw = asdict(self)
        for key in ("frameworks", "solution_times", "solution_r"):
            raw[key] = list(raw[key])
        raw["r_list"] = None if self.r_list is None else list(self.r_list)
        raw["r_range"] = list(self.r_range)
        raw["regression_r_range"] = (
            None if self.regression_r_range is None else list(self.regression_r_range)
        )
        return raw

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(raw)
        if "frameworks" in kwargs:
            kwargs["frameworks"] = tuple(kwargs["frameworks"])
        if kwargs.get("r_list") is not None:
            kwargs["r_list"] = tuple(int(r) for r in kwargs["r_list"])
        if "r_range" in kwargs:
            kwargs["r_range"] = tuple(int(r) for r in kwargs["r_range"])
        if kwargs.get("regression_r_range") is not None:
            kwargs["regression_r_range"] = tuple(
                int(r) for r in kwargs["regression_r_range"]
            )
        if "solution_times" in kwargs:
            kwargs["solution_times"] = tuple(float(t) for t in kwargs["solution_times"])
        if "solution_r" in kwargs:
            kwargs["solution_r"] = tuple(int(r) for r in kwargs["solution_r"])
        return cls(**kwargs)


def framework_pod_config(framework: str, cutoff: float) -> PodConfig:
    dq_part, _, ip_part = framework.partition("-")
    return PodConfig(
        inner_product=ip_part, use_dq=(dq_part == "DQ"), eigenvalue_cutoff=cutoff
    )


def run_fom(cfg: ExperimentConfig) -> tuple[Mesh1D, FemOperators, SnapshotSet]:
    """Full-order run with the step initial condition and zero forcing."""
    mesh = build_mesh(cfg.n_cells)
    ops = assemble_operators(mesh)
    u0 = step_initial_condition(mesh)
    snaps = solve_fom(cfg.fom_config(), mesh, u0, ops)
    return mesh, ops, snaps


def build_basis(
    snaps: SnapshotSet, ops: FemOperators, framework: str, cutoff: float
) -> PodBasis:
    pod_cfg = framework_pod_config(framework, cutoff)
    collection, weight = build_dq_collection(snaps, pod_cfg.use_dq)
    return compute_pod(collection, weight, pod_cfg, ops)


def build_bases(
    snaps: SnapshotSet, ops: FemOperators, frameworks, cutoff: float
) -> dict[str, PodBasis]:
    return {fw: build_basis(snaps, ops, fw, cutoff) for fw in frameworks}


@dataclass(frozen=True)
class FrameworkSweep:
    framework: str
    reports: list[ErrorReport]
    regressions: list[tuple[str, RegressionResult]]
    sidecar: dict


def _clamp_r_list(r_list: list[int], d: int, framework: str) -> list[int]:
    kept = sorted(set(r for r in r_list if 1 <= r <= d))
    dropped = sorted(set(r_list) - set(kept))
    if dropped:
        warnings.warn(
            f"{framework}: r values {dropped} exceed d = {d} and were dropped",
            RuntimeWarning,
            stacklevel=3,
        )
    if not kept:
        raise ValueError(f"{framework}: no usable r values at d = {d}")
    return kept


def _sweep_one_r(
    r: int,
    cfg: ExperimentConfig,
    ops: FemOperators,
    snaps: SnapshotSet,
    basis: PodBasis,
    rom_full: RomOperators,
) -> tuple[ErrorReport, dict]:
    rom_r = restrict_rom(rom_full, r)
    if cfg.initial_projection != "pod":
        # restriction slices a0, which only nests for the default projection
        a0 = initial_coefficients(basis, r, ops, snaps.values[0], cfg.initial_projection)
        rom_r = dataclasses.replace(rom_r, a0=a0)
    traj = solve_rom(
        rom_r,
        cfg.nu,
        cfg.dt,
        snaps.n_snapshots - 1,
        newton_tol=cfg.newton_tol,
        newton_max_iter=cfg.newton_max_iter,
    )
    lifted = lift(traj, basis, r)
    err_linf_l2, err_natural = compute_errors(snaps, lifted, cfg.nu, ops)
    eta = compute_eta(snaps, basis, r, ops)
    rhs1, rhs2, family = compute_rhs_terms(
        basis, r, cfg.dt, ops, i_u_constant=cfg.i_u_constant
    )
    truly, opt1, opt2 = optimality_benchmarks(snaps, basis, r, cfg.benchmark_w, ops)
    s_r_norm, m_r_inv_norm = operator_norm_diagnostics(rom_r)
    u0 = snaps.values[0]
    u_r0 = basis.modes[:, :r] @ rom_r.a0
    phi0 = u_r0 - ritz_project(u0, basis, r, ops)
    phi0_norm = float(squared_norms(phi0, L2, ops)[0])
    report = ErrorReport(
        r=r,
        err_linf_l2=err_linf_l2,
        err_natural=err_natural,
        eta_linf_l2=eta,
        tail=tail_sum(basis, r),
        rhs1=rhs1,
        rhs2=rhs2,
        rhs_family=family,
        truly_optimal=truly,
        optimal_i=opt1,
        optimal_ii=opt2,
        s_r_norm=s_r_norm,
        m_r_inv_norm=m_r_inv_norm,
        phi0_norm=phi0_norm,
    )
    ts = timestep_restriction_check(cfg.nu, cfg.dt, traj, rom_r)
    ts_record = {
        "r": r,
        "bound_relaxed": ts.bound_relaxed,
        "bound_tight": ts.bound_tight,
        "satisfied_relaxed": ts.satisfied_relaxed,
        "satisfied_tight": ts.satisfied_tight,
        "max_midpoint_l2": ts.max_midpoint_l2,
    }
    return report, ts_record


def sweep_framework(
    cfg: ExperimentConfig,
    mesh: Mesh1D,
    ops: FemOperators,
    snaps: SnapshotSet,
    basis: PodBasis,
) -> FrameworkSweep:
    """Per-r error study for one framework over the configured r values."""
    r_list = _clamp_r_list(cfg.resolved_r_list(), basis.d, basis.framework)
    rom_full = assemble_rom(
        basis, max(r_list), mesh, ops, snaps.values[0], cfg.initial_projection
    )
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        results = list(
            pool.map(
                lambda r: _sweep_one_r(r, cfg, ops, snaps, basis, rom_full), r_list
            )
        )
    reports = [rep for rep, _ in results]
    ts_records = [ts for _, ts in results]
    regressions = compute_regressions(cfg, reports, basis.d)
    sidecar = {
        "framework": basis.framework,
        "inner_product": basis.inner_product,
        "use_dq": basis.use_dq,
        "d": basis.d,
        "weight_m": basis.weight_m,
        "rhs_family": list(reports[0].rhs_family),
        "benchmark_w": cfg.benchmark_w,
        "regression_abscissa": cfg.regression_abscissa,
        "r_values": r_list,
        "timestep_restriction": ts_records,
        "sandwich_violations": _sandwich_violations(reports),
        "fitted_bound_constant": _fitted_bound_constants(reports),
    }
    return FrameworkSweep(
        framework=basis.framework,
        reports=reports,
        regressions=regressions,
        sidecar=sidecar,
    )


def _sandwich_violations(reports: list[ErrorReport]) -> list[int]:
    """r values where the errors leave the [rhs2, rhs1] band (observational)."""
    bad = []
    for rep in reports:
        for err in (rep.err_linf_l2, rep.err_natural):
            if not rep.rhs2 <= err <= rep.rhs1:
                bad.append(rep.r)
                break
    return bad


def _fitted_bound_constants(reports: list[ErrorReport]) -> dict:
    """Smallest C with err <= C (phi0 + rhs1) across the sweep, per error norm."""
    c_linf = max(r.err_linf_l2 / (r.phi0_norm + r.rhs1) for r in reports)
    c_nat = max(r.err_natural / (r.phi0_norm + r.rhs1) for r in reports)
    return {"err_linf_l2": c_linf, "err_natural": c_nat}


def compute_regressions(
    cfg: ExperimentConfig, reports: list[ErrorReport], d: int
) -> list[tuple[str, RegressionResult]]:
    r_values = [rep.r for rep in reports]
    abscissae = {
        "tail": [rep.tail for rep in reports],
        "rhs1": [rep.rhs1 for rep in reports],
        "rhs2": [rep.rhs2 for rep in reports],
    }[cfg.regression_abscissa]
    rows = []
    for quantity in ("err_linf_l2", "err_natural"):
        errors = [getattr(rep, quantity) for rep in reports]
        r_range = cfg.regression_r_range
        if r_range is None:
            r_range = default_regression_range(r_values, errors, d)
        if r_range is None:
            continue
        points = list(zip(abscissae, errors))
        try:
            rows.append((quantity, regression_order(points, r_values, r_range)))
        except ValueError as exc:
            warnings.warn(f"regression for {quantity} skipped: {exc}", RuntimeWarning)
    return rows


@dataclass(frozen=True)
class SolutionCut:
    """FOM and lifted ROM profiles at one time, padded with boundary zeros."""

    framework: str
    r: int
    time: float
    x: np.ndarray
    u_fom: np.ndarray
    u_rom: np.ndarray


def solution_profiles(
    cfg: ExperimentConfig,
    mesh: Mesh1D,
    ops: FemOperators,
    snaps: SnapshotSet,
    basis: PodBasis,
    r: int,
    times,
) -> list[SolutionCut]:
    """Run the reduced model at dimension r and cut profiles at the given times."""
    if r > basis.d:
        warnings.warn(
            f"{basis.framework}: r = {r} exceeds d = {basis.d}, clamped",
            RuntimeWarning,
            stacklevel=2,
        )
        r = basis.d
    rom_ops = assemble_rom(basis, r, mesh, ops, snaps.values[0], cfg.initial_projection)
    traj = solve_rom(
        rom_ops,
        cfg.nu,
        cfg.dt,
        snaps.n_snapshots - 1,
        newton_tol=cfg.newton_tol,
        newton_max_iter=cfg.newton_max_iter,
    )
    lifted = lift(traj, basis, r)
    x = mesh.all_nodes
    cuts = []
    for t in times:
        idx = int(round(t / snaps.dt))
        if not 0 <= idx < snaps.n_snapshots:
            raise ValueError(f"time {t} outside the run interval")
        cuts.append(
            SolutionCut(
                framework=basis.framework,
                r=r,
                time=idx * snaps.dt,
                x=x,
                u_fom=np.concatenate([[0.0], snaps.values[idx], [0.0]]),
                u_rom=np.concatenate([[0.0], lifted.values[idx], [0.0]]),
            )
        )
    return cuts
