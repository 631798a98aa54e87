"""Log-log error curves with reference-slope guide lines.

Input is the solver's sweep CSV (header names, 6-significant-digit floats).
Fitted slopes are printed numerically alongside the figure so CI can assert
on convergence orders without comparing images.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_MARKERS = ("o", "s", "^", "d", "v", "*")


@dataclass(frozen=True)
class PlotSpec:
    """One figure: error columns against h or delta from one or more CSVs."""

    csv_paths: tuple
    x: str = "h"
    y: tuple = ("l2_error",)
    slopes: tuple = ()
    out: str = "convergence.png"
    title: str = ""


def read_rows(paths) -> list[dict]:
    rows = []
    for path in paths:
        with open(path, newline="") as fh:
            rows.extend(csv.DictReader(fh))
    return rows


def _column(rows, name) -> np.ndarray:
    if name not in rows[0]:
        raise ValueError(f"column {name!r} missing from CSV header")
    vals = []
    for i, row in enumerate(rows):
        v = row.get(name)
        if v is None or v == "":
            raise ValueError(f"column {name!r} is empty in CSV row {i + 1}")
        vals.append(float(v))
    return np.asarray(vals)


def fit_slope(x, y) -> float:
    """Least-squares slope of log(y) against log(x)."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def render(spec: PlotSpec) -> str:
    """Render the figure, print fitted slopes, return the output path."""
    rows = read_rows(spec.csv_paths)
    if len(rows) < 2:
        raise ValueError(f"need at least 2 CSV rows, got {len(rows)}")
    xs = _column(rows, spec.x)
    series = [(name, _column(rows, name)) for name in spec.y]
    if not series:
        raise ValueError("no y columns requested")

    order = np.argsort(xs, kind="stable")
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    for (name, ys), marker in zip(series, itertools.cycle(_MARKERS)):
        ax.loglog(xs[order], ys[order], marker=marker, label=name)
        print(f"slope {name} vs {spec.x}: {fit_slope(xs, ys):.3f}")

    # guides anchored at the first data point of the first series
    x0, y0 = xs[0], series[0][1][0]
    xg = xs[order]
    for p in spec.slopes:
        ax.loglog(xg, y0 * (xg / x0) ** p, "--", color="0.5",
                  label=f"slope {p:g}")

    ax.set_xlabel(spec.x)
    ax.set_ylabel("error")
    if spec.title:
        ax.set_title(spec.title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.out)
    plt.close(fig)
    return spec.out
