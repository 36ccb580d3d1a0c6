"""Matplotlib rendering of the sweep and solution reports to PNG files.

Every figure is produced from the same data that lands in the CSVs; the
CSV files remain the authoritative output. Uses the Agg backend so the
CLI works headless.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_ERR_STYLES = {
    "err_linf_l2": dict(marker="o", color="tab:blue", label=r"$\ell^\infty(L^2)$ error"),
    "err_natural": dict(marker="s", color="tab:orange", label="natural-norm error"),
}
_FRAMEWORK_COLORS = {
    "noDQ-L2": "tab:blue",
    "noDQ-H01": "tab:orange",
    "DQ-L2": "tab:green",
    "DQ-H01": "tab:red",
}


def save_sweep_figure(path: str | Path, framework: str, reports, regressions) -> Path:
    """Four panels: errors with RHS bands, operator norms, regression fits."""
    rs = [rep.r for rep in reports]
    fig, axes = plt.subplots(2, 2, figsize=(11, 8))

    ax = axes[0, 0]
    for key, style in _ERR_STYLES.items():
        ax.semilogy(rs, [getattr(rep, key) for rep in reports], ms=4, **style)
    ax.semilogy(rs, [rep.eta_linf_l2 for rep in reports], "^-", color="tab:purple",
                ms=4, label="Ritz projection error")
    fam1, fam2 = reports[0].rhs_family
    ax.semilogy(rs, [rep.rhs1 for rep in reports], "--", color="k", label=fam1)
    ax.semilogy(rs, [rep.rhs2 for rep in reports], ":", color="gray", label=fam2)
    ax.set_xlabel("r")
    ax.set_title(f"{framework}: errors and bound terms")
    ax.legend(fontsize=8)

    ax = axes[0, 1]
    ax.semilogy(rs, [rep.s_r_norm for rep in reports], "o-", ms=4, label=r"$\|S_r\|$")
    ax.semilogy(rs, [rep.m_r_inv_norm for rep in reports], "s-", ms=4, label=r"$\|M_r^{-1}\|$")
    ax.set_xlabel("r")
    ax.set_title("reduced operator norms")
    ax.legend(fontsize=8)

    reg = dict(regressions)
    for ax, key in ((axes[1, 0], "err_linf_l2"), (axes[1, 1], "err_natural")):
        style = _ERR_STYLES[key]
        tails = [rep.tail for rep in reports]
        errs = [getattr(rep, key) for rep in reports]
        ax.loglog(tails, errs, "o", ms=4, color=style["color"], label=style["label"])
        if key in reg:
            res = reg[key]
            in_range = [
                (t, 10.0 ** (res.slope * math.log10(t) + res.intercept))
                for t, rep in zip(tails, reports)
                if res.r_min <= rep.r <= res.r_max and t > 0
            ]
            if in_range:
                ax.loglog(*zip(*in_range), "-", color="k",
                          label=f"slope {res.slope:.2f}")
        ax.set_xlabel("eigenvalue tail")
        ax.set_title(f"regression: {style['label']}")
        ax.legend(fontsize=8)

    fig.suptitle(framework)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_comparison_figure(path: str | Path, sweeps: dict) -> Path:
    """Both error norms against r for every framework in one figure."""
    fig, axes = plt.subplots(1, 2, figsize=(11, 4.5))
    for key, ax, title in (
        ("err_linf_l2", axes[0], r"$\ell^\infty(L^2)$ errors"),
        ("err_natural", axes[1], "natural-norm errors"),
    ):
        for framework, sweep in sweeps.items():
            color = _FRAMEWORK_COLORS.get(framework)
            ax.semilogy(
                [rep.r for rep in sweep.reports],
                [getattr(rep, key) for rep in sweep.reports],
                "o-",
                ms=3,
                color=color,
                label=framework,
            )
        ax.set_xlabel("r")
        ax.set_title(title)
        ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_solution_figure(path: str | Path, cuts) -> Path:
    """FOM profile with the lifted reduced solutions overlaid, one panel per time."""
    times = sorted({cut.time for cut in cuts})
    fig, axes = plt.subplots(1, len(times), figsize=(5.5 * len(times), 4), squeeze=False)
    for ax, t in zip(axes[0], times):
        at_t = [cut for cut in cuts if cut.time == t]
        ax.plot(at_t[0].x, at_t[0].u_fom, "k-", lw=2, label="FOM")
        for cut in at_t:
            color = _FRAMEWORK_COLORS.get(cut.framework)
            ax.plot(cut.x, cut.u_rom, "--", color=color, label=f"{cut.framework}, r={cut.r}")
        ax.set_xlabel("x")
        ax.set_ylabel("u")
        ax.set_title(f"t = {t:g}")
        ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
