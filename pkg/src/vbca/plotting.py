"""Static PNG figures for experiment tables and single runs.

Figures are rendered with the non-interactive Agg backend and saved without a
software-version tag, so the same table always yields the same bytes.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .harness import RunReport, Table, coverage_fits  # noqa: E402

_SAVE = {"dpi": 120, "metadata": {"Software": None}}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, format="png", **_SAVE)
    plt.close(fig)
    return path


def _series(table: Table, key: str, x: str, y: str) -> dict:
    out: dict = {}
    for r in table.rows:
        if isinstance(r[y], float) and math.isnan(r[y]):
            continue
        out.setdefault(r[key], ([], []))
        out[r[key]][0].append(r[x])
        out[r[key]][1].append(r[y])
    return out


def plot_cp_vs_distance(table: Table, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for k, (cp, d) in _series(table, "k", "cp", "avg_central_distance_m").items():
        ax.plot(cp, d, marker="o", label=f"k={k}")
    ax.set_xlabel("compactness parameter")
    ax.set_ylabel("average distance to central drone (m)")
    ax.legend(fontsize=7, ncol=2)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_coverage_vs_k(table: Table, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    fits = coverage_fits(table)
    for cp, (k, v) in _series(table, "cp", "k", "union_volume_m3").items():
        line, = ax.plot(k, [x / 1e6 for x in v], marker="o", label=f"cp={cp}")
        if cp in fits:
            slope, intercept, _ = fits[cp]
            ax.plot(k, [(slope * x + intercept) / 1e6 for x in k],
                    ls="--", lw=0.8, color=line.get_color())
    ax.set_xlabel("peripheral drones k")
    ax.set_ylabel("union coverage (10^6 m^3)")
    ax.legend(fontsize=7, ncol=2)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_baseline(table: Table, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    swarm = _series(table, "cp", "k", "vbca_coverage_m3")
    base = _series(table, "cp", "k", "baseline_coverage_m3")
    for cp, (k, v) in swarm.items():
        line, = ax.plot(k, [x / 1e6 for x in v], marker="o", label=f"swarm cp={cp}")
        bk, bv = base[cp]
        ax.plot(bk, [x / 1e6 for x in bv], marker="x", ls="--",
                color=line.get_color(), label=f"exact placement cp={cp}")
    ax.set_xlabel("peripheral drones k")
    ax.set_ylabel("union coverage (10^6 m^3)")
    ax.legend(fontsize=7)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_stability(table: Table, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    steps = table.column("step")
    for col in table.columns[1:-1]:
        ax.plot(steps, table.column(col), lw=0.6, alpha=0.6)
    ax.plot(steps, table.column("mean_variation_m"), color="k", lw=1.5, label="mean")
    ax.set_yscale("symlog", linthresh=1e-3)
    ax.set_xlabel("step")
    ax.set_ylabel("|change of central distance| (m)")
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_run(report: RunReport, path: str | Path) -> Path:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    steps = [m.step for m in report.metrics]
    ax1.plot(steps, [m.avg_central_distance for m in report.metrics])
    ax1.set_xlabel("step")
    ax1.set_ylabel("average central distance (m)")
    ax2.semilogy(steps, [max(m.max_displacement, 1e-12) for m in report.metrics])
    ax2.axhline(report.params["ss_threshold"], color="r", ls="--", lw=0.8)
    ax2.set_xlabel("step")
    ax2.set_ylabel("max displacement (m)")
    for ax in (ax1, ax2):
        ax.grid(alpha=0.3)
    return _save(fig, path)
