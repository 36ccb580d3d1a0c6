import numpy as np
import pytest

from podburgers.experiments import FRAMEWORKS, ExperimentConfig, build_bases, run_fom


@pytest.fixture(scope="session")
def small_run():
    """Shared small production run: 32 cells, 50 steps, step initial condition."""
    cfg = ExperimentConfig(n_cells=32, nu=1e-2, dt=1e-3, t_final=0.05, r_range=(2, 8))
    mesh, ops, snaps = run_fom(cfg)
    return cfg, mesh, ops, snaps


@pytest.fixture(scope="session")
def small_bases(small_run):
    cfg, mesh, ops, snaps = small_run
    return build_bases(snaps, ops, FRAMEWORKS, cfg.eigenvalue_cutoff)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
