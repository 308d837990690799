"""Deterministic SVG figures from the CSV outputs."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

KINDS = ("path2d", "path3d-projection", "convergence")


class SchemaError(ValueError):
    pass


def _style():
    plt.rcParams["svg.hashsalt"] = "tropipm"
    plt.rcParams["svg.fonttype"] = "none"
    plt.rcParams["figure.figsize"] = (5.0, 4.0)
    plt.rcParams["font.family"] = "serif"
    plt.rcParams["axes.spines.top"] = False
    plt.rcParams["axes.spines.right"] = False


def _num(s: str) -> float:
    s = s.strip()
    if s == "-inf":
        return -math.inf
    if "/" in s:
        p, q = s.split("/")
        return int(p) / int(q)
    return float(s)


def read_csv(path) -> tuple:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return [], []
    return rows[0], rows[1:]


def _save(fig, out):
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_path2d(header, rows, out):
    if rows and header[:3] != ["lambda", "x1", "x2"]:
        raise SchemaError("path2d needs columns lambda,x1,x2")
    _style()
    fig, ax = plt.subplots()
    xs = [_num(r[1]) for r in rows]
    ys = [_num(r[2]) for r in rows]
    ax.plot(xs, ys, ":", color="tab:blue", marker="o", markersize=3)
    ax.set_xlabel("$x_1$")
    ax.set_ylabel("$x_2$")
    ax.set_title("tropical central path")
    _save(fig, out)


def plot_path3d(header, rows, out):
    if rows and (header[0] != "lambda" or len(header) < 4):
        raise SchemaError("path3d-projection needs columns lambda,x1,x2,x3")
    _style()
    fig, ax = plt.subplots()
    # oblique projection: x3 drawn along the diagonal
    px = [_num(r[1]) + 0.5 * _num(r[3]) for r in rows]
    py = [_num(r[2]) + 0.5 * _num(r[3]) for r in rows]
    ax.plot(px, py, color="tab:blue", marker="o", markersize=3)
    ax.set_xlabel("$x_1 + x_3/2$")
    ax.set_ylabel("$x_2 + x_3/2$")
    ax.set_title("tropical central path (oblique projection)")
    _save(fig, out)


def plot_convergence(header, rows, out):
    if rows and header[:3] != ["t", "lambda", "deviation"]:
        raise SchemaError("convergence needs columns t,lambda,deviation")
    _style()
    fig, ax = plt.subplots()
    series = {}
    for r in rows:
        if r[2]:
            series.setdefault(r[0], []).append((_num(r[1]), float(r[2])))
    for t, pts in series.items():
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", markersize=3, label=f"t = {t}")
    ax.set_xlabel("$\\lambda$")
    ax.set_ylabel("$d_\\infty$ deviation")
    if series:
        ax.legend(frameon=False)
    _save(fig, out)


def plot_trajectory(header, rows, out, t: float):
    """log_t of the last two coordinates of an IPM trajectory CSV."""
    _style()
    fig, ax = plt.subplots()
    lt = math.log(t)
    xs = [math.log(float(r[-2])) / lt for r in rows]
    ys = [math.log(float(r[-1])) / lt for r in rows]
    ax.plot(xs, ys, color="tab:red", linewidth=0.8, marker=".", markersize=2)
    ax.set_xlabel(f"$\\log_t {header[-2]}$")
    ax.set_ylabel(f"$\\log_t {header[-1]}$")
    _save(fig, out)


def plot_csv(path, kind: str, out):
    if kind not in KINDS:
        raise SchemaError(f"unknown plot kind {kind!r}")
    header, rows = read_csv(path)
    {"path2d": plot_path2d, "path3d-projection": plot_path3d, "convergence": plot_convergence}[kind](
        header, rows, Path(out)
    )
