"""Static plots: learning curves across seeds and final-position histograms."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .core import RECORD_COLUMNS  # noqa: E402
from .environment import TrapGeometry  # noqa: E402

METRICS = RECORD_COLUMNS[1:]


def aggregate_records(per_seed: list[list[dict]]) -> list[dict]:
    """Per-generation mean and population std (ddof=0) of every record column.

    Only generations present in every seed are aggregated.
    """
    if not per_seed:
        return []
    common = set.intersection(*({int(r["generation"]) for r in rows} for rows in per_seed))
    by_gen = [{int(r["generation"]): r for r in rows} for rows in per_seed]
    out = []
    for g in sorted(common):
        row = {"generation": g}
        for col in METRICS:
            vals = np.array([float(seed[g][col]) for seed in by_gen])
            row[f"{col}_mean"] = float(np.mean(vals))
            row[f"{col}_std"] = float(np.std(vals))
        out.append(row)
    return out


def aggregate_columns() -> list[str]:
    cols = ["generation"]
    for col in METRICS:
        cols += [f"{col}_mean", f"{col}_std"]
    return cols


def write_aggregate_csv(rows: list[dict], path) -> None:
    cols = aggregate_columns()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in rows:
            w.writerow([str(r["generation"])] + [repr(float(r[c])) for c in cols[1:]])


def read_aggregate_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [{k: (int(v) if k == "generation" else float(v)) for k, v in r.items()} for r in rows]


@dataclass
class CurveData:
    generations: np.ndarray
    means: dict[str, np.ndarray]
    stds: dict[str, np.ndarray]


def plot_curves(rows: list[dict], metrics: list[str], out_path, title: str | None = None) -> CurveData:
    """One line per metric with a shaded +/- std band; also writes ``<out>.csv``."""
    for m in metrics:
        if m not in METRICS:
            raise ValueError(f"unknown metric {m!r}; choose from {', '.join(METRICS)}")
    gens = np.array([r["generation"] for r in rows], dtype=np.int64)
    data = CurveData(
        generations=gens,
        means={m: np.array([r[f"{m}_mean"] for r in rows], dtype=np.float64) for m in metrics},
        stds={m: np.array([r[f"{m}_std"] for r in rows], dtype=np.float64) for m in metrics},
    )
    fig, ax = plt.subplots(figsize=(6, 4))
    for m in metrics:
        mu, sd = data.means[m], data.stds[m]
        ax.plot(gens, mu, label=m)
        ax.fill_between(gens, mu - sd, mu + sd, alpha=0.25)
    ax.set_xlabel("generation")
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path)
    plt.close(fig)

    with open(out_path.with_suffix(out_path.suffix + ".csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["generation"] + [f"{m}_{s}" for m in metrics for s in ("mean", "std")])
        for k, g in enumerate(gens):
            w.writerow([int(g)] + [repr(float(v)) for m in metrics for v in (data.means[m][k], data.stds[m][k])])
    return data


def read_behaviors(path) -> np.ndarray:
    """(n, 2) final positions from a behaviors.csv."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        return np.zeros((0, 2))
    return np.array([[float(r["final_x"]), float(r["final_y"])] for r in rows], dtype=np.float64)


def _axis_range(values: np.ndarray, extra: list[float]) -> tuple[float, float]:
    pool = np.concatenate([values, np.asarray(extra, dtype=np.float64)]) if extra else values
    if pool.size == 0:
        return -1.0, 1.0
    lo, hi = float(pool.min()), float(pool.max())
    if hi - lo < 1e-9:
        return lo - 0.5, hi + 0.5
    pad = 0.02 * (hi - lo)
    return lo - pad, hi + pad


def plot_histogram(positions: np.ndarray, out_path, bins: int = 50, trap: TrapGeometry | None = None):
    """2D histogram of final positions; returns (counts, x_edges, y_edges).

    Trap walls, when given, are drawn as red lines and widen the plotted range.
    """
    if bins <= 0:
        raise ValueError("bins must be positive")
    wall_x: list[float] = []
    wall_y: list[float] = []
    if trap is not None:
        for (x0, y0), (x1, y1) in trap.segments():
            wall_x += [x0, x1]
            wall_y += [y0, y1]
    xr = _axis_range(positions[:, 0], wall_x)
    yr = _axis_range(positions[:, 1], wall_y)
    counts, xe, ye = np.histogram2d(positions[:, 0], positions[:, 1], bins=bins, range=[xr, yr])

    fig, ax = plt.subplots(figsize=(5, 5))
    ax.pcolormesh(xe, ye, counts.T, cmap="viridis", shading="flat")
    if trap is not None:
        for (x0, y0), (x1, y1) in trap.segments():
            ax.plot([x0, x1], [y0, y1], color="red", linewidth=2)
    ax.set_xlabel("final x")
    ax.set_ylabel("final y")
    ax.set_aspect("equal", adjustable="box")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return counts, xe, ye
