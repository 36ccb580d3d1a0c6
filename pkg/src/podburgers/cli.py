"""Command line driver: fom, pod, sweep, solutions, verify.

Every command takes a JSON config (--config) whose fields individual
flags override. Exit codes: 0 success, 1 usage error or missing input,
2 nonlinear solver failure, 3 verification failure. The tool is fully
deterministic; --seedless is accepted everywhere to document that no
randomness is involved.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import dataio, plots
from .experiments import (
    FRAMEWORKS,
    ExperimentConfig,
    build_basis,
    build_bases,
    run_fom,
    solution_profiles,
    sweep_framework,
)
from .fom import NonlinearSolveFailure
from .mesh_fem import assemble_operators, build_mesh


class CliUsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # map argparse usage errors onto exit code 1
        raise CliUsageError(message)


def _add_shared(parser: _Parser) -> None:
    parser.add_argument("--config", type=Path, help="JSON config file")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument(
        "--seedless",
        action="store_true",
        help="no-op; documents that every command is deterministic",
    )


def _add_physics(parser: _Parser) -> None:
    parser.add_argument("--n-cells", type=int, dest="n_cells")
    parser.add_argument("--nu", type=float)
    parser.add_argument("--dt", type=float)
    parser.add_argument("--t-final", type=float, dest="t_final")


def build_parser() -> _Parser:
    parser = _Parser(prog="podburgers", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_fom = sub.add_parser("fom", help="run the full-order model, write snapshots")
    _add_shared(p_fom)
    _add_physics(p_fom)

    p_pod = sub.add_parser("pod", help="build POD bases from a snapshot file")
    _add_shared(p_pod)
    p_pod.add_argument("--snapshots", type=Path, help="snapshot file (default <out>/snapshots.csv)")
    p_pod.add_argument("--frameworks", type=str, help="comma list from " + ",".join(FRAMEWORKS))
    p_pod.add_argument("--cutoff", type=float, dest="eigenvalue_cutoff")

    p_sweep = sub.add_parser("sweep", help="per-r error study for each framework")
    _add_shared(p_sweep)
    p_sweep.add_argument("--snapshots", type=Path)
    p_sweep.add_argument("--frameworks", type=str)
    p_sweep.add_argument("--r-min", type=int)
    p_sweep.add_argument("--r-max", type=int)
    p_sweep.add_argument("--r-list", type=str, help="comma list of r values")
    p_sweep.add_argument("--i-u-constant", type=float, dest="i_u_constant")
    p_sweep.add_argument("--abscissa", choices=("tail", "rhs1", "rhs2"), dest="regression_abscissa")
    p_sweep.add_argument("--workers", type=int)
    p_sweep.add_argument("--no-figures", action="store_true")

    p_sol = sub.add_parser("solutions", help="FOM vs lifted ROM profiles at chosen times")
    _add_shared(p_sol)
    p_sol.add_argument("--snapshots", type=Path)
    p_sol.add_argument("--bases", type=Path, help="directory with basis files (default <out>)")
    p_sol.add_argument("--frameworks", type=str)
    p_sol.add_argument("--r", type=str, help="comma list of reduced dimensions")
    p_sol.add_argument("--times", type=str, help="comma list of output times")
    p_sol.add_argument("--no-figures", action="store_true")

    p_ver = sub.add_parser("verify", help="run identity / convergence suites")
    _add_shared(p_ver)
    p_ver.add_argument("--suite", choices=("identities", "convergence", "all"), default="identities")
    p_ver.add_argument(
        "--perturb-eigenvalues",
        type=float,
        default=0.0,
        help="test mode: skew eigenvalues so identity checks must fail",
    )
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    if getattr(args, "config", None) is not None:
        path = Path(args.config)
        if not path.exists():
            raise CliUsageError(f"config file not found: {path}")
        try:
            cfg = ExperimentConfig.from_dict(json.loads(path.read_text(encoding="utf-8")))
        except (ValueError, TypeError) as exc:
            raise CliUsageError(f"invalid config {path}: {exc}") from exc
    else:
        cfg = ExperimentConfig()
    overrides = {}
    for key in (
        "n_cells",
        "nu",
        "dt",
        "t_final",
        "eigenvalue_cutoff",
        "i_u_constant",
        "regression_abscissa",
        "workers",
    ):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "frameworks", None):
        overrides["frameworks"] = tuple(args.frameworks.split(","))
    if getattr(args, "r_list", None):
        overrides["r_list"] = tuple(int(tok) for tok in args.r_list.split(","))
    if getattr(args, "r_min", None) is not None or getattr(args, "r_max", None) is not None:
        lo = args.r_min if args.r_min is not None else cfg.r_range[0]
        hi = args.r_max if args.r_max is not None else cfg.r_range[1]
        overrides["r_range"] = (lo, hi)
    if getattr(args, "r", None):
        overrides["solution_r"] = tuple(int(tok) for tok in args.r.split(","))
    if getattr(args, "times", None):
        overrides["solution_times"] = tuple(float(tok) for tok in args.times.split(","))
    if getattr(args, "out", None) is not None:
        overrides["out_dir"] = str(args.out)
    if getattr(args, "no_figures", False):
        overrides["figures"] = False
    try:
        return replace(cfg, **overrides)
    except ValueError as exc:
        raise CliUsageError(str(exc)) from exc


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _snapshot_path(args, out: Path) -> Path:
    path = getattr(args, "snapshots", None)
    path = Path(path) if path is not None else out / "snapshots.csv"
    if not path.exists():
        raise CliUsageError(f"snapshot file not found: {path}")
    return path


def cmd_fom(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    out = _out_dir(cfg)
    _, _, snaps = run_fom(cfg)
    path = out / "snapshots.csv"
    dataio.write_snapshots(path, snaps, cfg.n_cells, cfg.nu, cfg.t_final)
    print(f"wrote {path} ({snaps.n_snapshots} x {snaps.n_dof})")
    return 0


def cmd_pod(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    out = _out_dir(cfg)
    snaps, meta = dataio.read_snapshots(_snapshot_path(args, out))
    mesh = build_mesh(meta["n_cells"])
    ops = assemble_operators(mesh)
    for fw in cfg.frameworks:
        basis = build_basis(snaps, ops, fw, cfg.eigenvalue_cutoff)
        path = out / f"basis_{fw}.csv"
        dataio.write_basis(path, basis, meta["n_cells"], cfg.eigenvalue_cutoff)
        print(f"wrote {path} (d = {basis.d})")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    out = _out_dir(cfg)
    snaps, meta = dataio.read_snapshots(_snapshot_path(args, out))
    mesh = build_mesh(meta["n_cells"])
    ops = assemble_operators(mesh)
    cfg = replace(cfg, n_cells=meta["n_cells"], nu=meta["nu"], dt=meta["dt"], t_final=meta["t_final"])
    bases = build_bases(snaps, ops, cfg.frameworks, cfg.eigenvalue_cutoff)
    sweeps = {}
    for fw in cfg.frameworks:
        sweep = sweep_framework(cfg, mesh, ops, snaps, bases[fw])
        sweeps[fw] = sweep
        dataio.write_report_csv(out / f"report_{fw}.csv", sweep.reports)
        dataio.write_regression_csv(out / f"regression_{fw}.csv", sweep.regressions)
        (out / f"sweep_{fw}.json").write_text(
            json.dumps(sweep.sidecar, indent=2) + "\n", encoding="utf-8"
        )
        if cfg.figures:
            plots.save_sweep_figure(out / f"fig_sweep_{fw}.png", fw, sweep.reports, sweep.regressions)
        slopes = {q: f"{res.slope:.3f}" for q, res in sweep.regressions}
        print(f"{fw}: d = {bases[fw].d}, regression slopes {slopes}")
    if cfg.figures and len(sweeps) > 1:
        plots.save_comparison_figure(out / "fig_comparison.png", sweeps)
    return 0


def cmd_solutions(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    out = _out_dir(cfg)
    snaps, meta = dataio.read_snapshots(_snapshot_path(args, out))
    mesh = build_mesh(meta["n_cells"])
    ops = assemble_operators(mesh)
    cfg = replace(cfg, n_cells=meta["n_cells"], nu=meta["nu"], dt=meta["dt"], t_final=meta["t_final"])
    bases_dir = Path(args.bases) if getattr(args, "bases", None) else out
    all_cuts = []
    for fw in cfg.frameworks:
        basis_path = bases_dir / f"basis_{fw}.csv"
        if not basis_path.exists():
            raise CliUsageError(f"basis file not found: {basis_path} (run the pod command first)")
        basis, _ = dataio.read_basis(basis_path)
        for r in cfg.solution_r:
            cuts = solution_profiles(cfg, mesh, ops, snaps, basis, r, cfg.solution_times)
            for cut in cuts:
                path = out / f"solution_{fw}_r{cut.r}_t{cut.time:g}.csv"
                dataio.write_solution_csv(path, cut.x, cut.u_fom, cut.u_rom)
                print(f"wrote {path}")
            all_cuts.extend(cuts)
    if cfg.figures and all_cuts:
        plots.save_solution_figure(out / "fig_solutions.png", all_cuts)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    from .verify import verify_convergence, verify_identities

    cfg = load_config(args)
    out = _out_dir(cfg)
    results = []
    if args.suite in ("identities", "all"):
        results.append(verify_identities(perturb_eigenvalues=args.perturb_eigenvalues))
    if args.suite in ("convergence", "all"):
        results.append(verify_convergence())
    report = {"passed": all(r["passed"] for r in results), "suites": results}
    path = out / "verify.json"
    path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    for suite in results:
        for check in suite["checks"]:
            status = "PASS" if check["passed"] else "FAIL"
            print(f"[{status}] {check['name']}: {check['value']:.3e}")
    print(f"wrote {path}")
    return 0 if report["passed"] else 3


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliUsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    handlers = {
        "fom": cmd_fom,
        "pod": cmd_pod,
        "sweep": cmd_sweep,
        "solutions": cmd_solutions,
        "verify": cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except CliUsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NonlinearSolveFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())
