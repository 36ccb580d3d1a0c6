"""POD reduced-order modeling laboratory for the 1D viscous Burgers equation."""

from .analysis import (
    ErrorReport,
    RegressionResult,
    compute_errors,
    compute_eta,
    compute_rhs_terms,
    operator_norm_diagnostics,
    optimality_benchmarks,
    regression_order,
)
from .experiments import FRAMEWORKS, ExperimentConfig, build_basis, run_fom, sweep_framework
from .fom import (
    FomConfig,
    ManufacturedSolution,
    NonlinearSolveFailure,
    SnapshotSet,
    cn_step,
    solve_fom,
    step_initial_condition,
)
from .mesh_fem import (
    FemOperators,
    Mesh1D,
    assemble_operators,
    build_mesh,
    inner_product,
    nonlinear_form,
)
from .pod import (
    EmptyBasisError,
    PodBasis,
    PodConfig,
    build_dq_collection,
    compute_pod,
    pod_project,
    tail_sum,
)
from .projection import (
    projection_error_tail_identity,
    ritz_deflation_norms,
    ritz_project,
    w_orth_project,
)
from .rom import (
    RomOperators,
    RomTrajectory,
    assemble_rom,
    lift,
    rom_step,
    solve_rom,
    timestep_restriction_check,
)

__version__ = "0.1.0"
