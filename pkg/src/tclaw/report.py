"""Tabular and graphical output for runtime estimates.

Builds parameter-grid rows from the cost model, serializes them as CSV,
and renders summary figures.  Figures use the object API on the Agg
canvas, so no display is needed.
"""

from __future__ import annotations

import csv
import math
import os

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .cost import optimal_theta, runtime_refined, runtime_tcount

__all__ = ["COLUMNS", "estimate_grid", "format_table", "write_csv", "render_figures"]

COLUMNS = ("n", "t", "w", "m", "alpha", "theta", "runtime", "refined")


def estimate_grid(
    ns: list[int],
    ts: list[int],
    ws: list[int],
    ms: list[int],
    alpha: float = 3.0,
) -> list[dict]:
    """One row per (n, t, w, m): the matmul-unit runtime estimate and the
    theta-aware variant at the numerically optimal rate."""
    rows = []
    for n in ns:
        for t in ts:
            for w in ws:
                theta = optimal_theta(n, t, w)
                for m in ms:
                    rows.append({
                        "n": n,
                        "t": t,
                        "w": w,
                        "m": m,
                        "alpha": alpha,
                        "theta": theta,
                        "runtime": runtime_tcount(n, t, w, m, alpha),
                        "refined": runtime_refined(n, t, w, m, theta, alpha),
                    })
    return rows


def format_table(rows: list[dict]) -> str:
    """Aligned text table over COLUMNS."""
    def cell(row, key):
        v = row[key]
        if key in ("theta", "runtime", "refined"):
            return f"{v:.3e}"
        return str(v)

    grid = [list(COLUMNS)] + [[cell(r, k) for k in COLUMNS] for r in rows]
    widths = [max(len(line[i]) for line in grid) for i in range(len(COLUMNS))]
    out = []
    for line in grid:
        out.append("  ".join(s.rjust(w) for s, w in zip(line, widths)))
    return "\n".join(out) + "\n"


def write_csv(rows: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=COLUMNS)
        writer.writeheader()
        writer.writerows(rows)


def _log_axes(fig, xlabel, ylabel):
    ax = fig.add_subplot()
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_yscale("log", base=2)
    ax.grid(True, which="both", alpha=0.3)
    return ax


def render_figures(rows: list[dict], out_dir: str) -> list[str]:
    """Write PNG figures summarizing the grid; returns the paths written.

    Runtime against T-count (one line per register size) when several
    counts are present, and runtime against store capacity on a log-log
    scale when several capacities are present.
    """
    written = []
    ns = sorted({r["n"] for r in rows})
    ts = sorted({r["t"] for r in rows})
    ws = sorted({r["w"] for r in rows})
    w0, m0 = rows[0]["w"], rows[0]["m"]

    if len(ts) > 1:
        fig = Figure(figsize=(7, 4.5))
        FigureCanvasAgg(fig)
        ax = _log_axes(fig, "T-count", "runtime (matmul units)")
        for n in ns:
            pts = [(r["t"], r["runtime"]) for r in rows
                   if r["n"] == n and r["w"] == w0 and r["m"] == m0]
            if pts:
                ax.plot(*zip(*sorted(pts)), marker="o", label=f"n={n}")
        ax.legend()
        ax.set_title(f"store capacity {w0:,}, {m0} worker{'s' * (m0 != 1)}")
        path = os.path.join(out_dir, "runtime_vs_tcount.png")
        fig.savefig(path, dpi=150, bbox_inches="tight")
        written.append(path)

    if len(ws) > 1:
        fig = Figure(figsize=(7, 4.5))
        FigureCanvasAgg(fig)
        ax = _log_axes(fig, "store capacity w", "runtime (matmul units)")
        ax.set_xscale("log", base=2)
        t0 = ts[-1]
        for n in ns:
            pts = [(r["w"], r["refined"]) for r in rows
                   if r["n"] == n and r["t"] == t0 and r["m"] == m0]
            if pts:
                ax.plot(*zip(*sorted(pts)), marker="o", label=f"n={n}, t={t0}")
        # reference slope: halving runtime per quadrupling of w
        lo, hi = min(ws), max(ws)
        y0 = max(r["refined"] for r in rows if r["w"] == lo and r["t"] == t0)
        ax.plot([lo, hi], [y0, y0 * math.sqrt(lo / hi)], "k--", alpha=0.5,
                label="w^-1/2")
        ax.legend()
        path = os.path.join(out_dir, "runtime_vs_capacity.png")
        fig.savefig(path, dpi=150, bbox_inches="tight")
        written.append(path)
    return written
