"""File formats for snapshots, bases, trajectories and report CSVs.

Matrix files are comma-separated with 17 significant digits so that
write/read round trips are lossless. Snapshot and trajectory files start
with a key=value header row holding the run metadata; basis and report
files carry a column-name header row plus a JSON sidecar.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .analysis import (
    REGRESSION_CSV_HEADER,
    REPORT_CSV_HEADER,
    ErrorReport,
    RegressionResult,
)
from .fom import SnapshotSet
from .pod import PodBasis

_FMT = "%.17g"


def _format_row(values) -> str:
    return ",".join(_FMT % v for v in values)


def _write_matrix(handle, matrix: np.ndarray) -> None:
    for row in np.atleast_2d(matrix):
        handle.write(_format_row(row) + "\n")


def _parse_header(line: str) -> dict[str, str]:
    items = {}
    for token in line.strip().split(","):
        key, _, value = token.partition("=")
        if not value:
            raise ValueError(f"malformed header token {token!r}")
        items[key] = value
    return items


def _load_matrix(lines: list[str]) -> np.ndarray:
    return np.array(
        [[float(tok) for tok in line.strip().split(",")] for line in lines if line.strip()]
    )


def write_snapshots(
    path: str | Path, snaps: SnapshotSet, n_cells: int, nu: float, t_final: float
) -> None:
    """Snapshot matrix: metadata header row, then one row per time index."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(
            f"n_cells={n_cells},dt={_FMT % snaps.dt},nu={_FMT % nu},"
            f"t_final={_FMT % t_final}\n"
        )
        _write_matrix(handle, snaps.values)


def read_snapshots(path: str | Path) -> tuple[SnapshotSet, dict]:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    header = _parse_header(lines[0])
    meta = {
        "n_cells": int(header["n_cells"]),
        "dt": float(header["dt"]),
        "nu": float(header["nu"]),
        "t_final": float(header["t_final"]),
    }
    values = _load_matrix(lines[1:])
    if values.shape[1] != meta["n_cells"] - 1:
        raise ValueError(
            f"snapshot width {values.shape[1]} does not match n_cells={meta['n_cells']}"
        )
    return SnapshotSet(dt=meta["dt"], values=values), meta


def write_basis(path: str | Path, basis: PodBasis, n_cells: int, cutoff: float) -> None:
    """Mode matrix (modes as columns) plus a JSON sidecar with the metadata."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(",".join(f"mode_{i + 1:03d}" for i in range(basis.d)) + "\n")
        _write_matrix(handle, basis.modes)
    sidecar = {
        "eigenvalues": [float(_FMT % v) for v in basis.eigenvalues],
        "inner_product": basis.inner_product,
        "use_dq": basis.use_dq,
        "weight_m": basis.weight_m,
        "eigenvalue_cutoff": cutoff,
        "n_cells": n_cells,
    }
    path.with_suffix(".json").write_text(
        json.dumps(sidecar, indent=2) + "\n", encoding="utf-8"
    )


def read_basis(path: str | Path) -> tuple[PodBasis, dict]:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    modes = _load_matrix(lines[1:])
    sidecar = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    basis = PodBasis(
        modes=modes,
        eigenvalues=np.array(sidecar["eigenvalues"], dtype=float),
        weight_m=int(sidecar["weight_m"]),
        inner_product=sidecar["inner_product"],
        use_dq=bool(sidecar["use_dq"]),
    )
    return basis, sidecar


def write_trajectory(
    path: str | Path, coefficients: np.ndarray, r: int, nu: float, dt: float, basis_id: str
) -> None:
    """Coefficient matrix in the snapshot layout plus a JSON sidecar."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"r={r},nu={_FMT % nu},dt={_FMT % dt},basis={basis_id}\n")
        _write_matrix(handle, coefficients)
    sidecar = {"r": r, "nu": nu, "dt": dt, "basis": basis_id}
    path.with_suffix(".json").write_text(
        json.dumps(sidecar, indent=2) + "\n", encoding="utf-8"
    )


def read_trajectory(path: str | Path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    header = _parse_header(lines[0])
    meta = {
        "r": int(header["r"]),
        "nu": float(header["nu"]),
        "dt": float(header["dt"]),
        "basis": header["basis"],
    }
    return _load_matrix(lines[1:]), meta


def write_report_csv(path: str | Path, reports: list[ErrorReport]) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(REPORT_CSV_HEADER + "\n")
        for report in reports:
            handle.write(report.csv_row() + "\n")


def write_regression_csv(
    path: str | Path, rows: list[tuple[str, RegressionResult]]
) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(REGRESSION_CSV_HEADER + "\n")
        for quantity, res in rows:
            handle.write(
                f"{quantity},{res.slope:.17g},{res.intercept:.17g},"
                f"{res.r_squared:.17g},{res.r_min},{res.r_max}\n"
            )


def write_solution_csv(
    path: str | Path, x: np.ndarray, u_fom: np.ndarray, u_rom: np.ndarray
) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write("x,u_fom,u_rom\n")
        for xv, fv, rv in zip(x, u_fom, u_rom):
            handle.write(f"{xv:.17g},{fv:.17g},{rv:.17g}\n")
