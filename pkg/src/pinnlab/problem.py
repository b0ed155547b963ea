"""Benchmark PDE on the unit square.

    psi_xx + psi_yy + psi * psi_y = f(x, y),   (x, y) in [0, 1]^2

with f = sin(pi x) (2 - pi^2 y^2 + 2 y^3 sin(pi x)) and exact solution
psi = y^2 sin(pi x). The approximation is psi_ap = A + F * N where the lift
A = y sin(pi x) carries the boundary values and the gate
F = sin(x - 1) sin(y - 1) sin(x) sin(y) vanishes on every edge.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
import io
from typing import NamedTuple

import numpy as np

from .autodiff import X, Y, HyperDual2, hd_var, sin
from .network import LayerSpec, Params, forward

PI = np.pi


class Point(NamedTuple):
    x: float
    y: float


@dataclass
class ResidualParts:
    psi: object
    psi_y: object
    psi_xx: object
    psi_yy: object
    f_val: object
    residual: object


def source_f(pt):
    x, y = pt
    s = np.sin(PI * x)
    return s * (2.0 - PI ** 2 * y * y + 2.0 * y ** 3 * s)


def exact_psi(pt):
    x, y = pt
    return y * y * np.sin(PI * x)


def boundary_A(pt):
    x, y = pt
    return y * sin(PI * x)


def gate_F(pt):
    x, y = pt
    return sin(x - 1.0) * sin(y - 1.0) * sin(x) * sin(y)


def exact_psi_generic(pt):
    """Exact solution written with the generic ``sin`` so HyperDual2 flows through."""
    x, y = pt
    return y * y * sin(PI * x)


def trial_value(spec: LayerSpec, p: Params, pt):
    """psi_ap on plain reals (or lane arrays)."""
    return boundary_A(pt) + gate_F(pt) * forward(spec, p, pt)


def seed_point(pt):
    x, y = pt
    return hd_var(np.asarray(x, dtype=float), X), hd_var(np.asarray(y, dtype=float), Y)


def trial_psi(spec: LayerSpec, p: Params, pt) -> HyperDual2:
    """psi_ap and its partials at ``pt`` (scalars or lane arrays) in one pass."""
    hx = seed_point(pt)
    return boundary_A(hx) + gate_F(hx) * forward(spec, p, hx)


def residual_of(psi: HyperDual2, pt) -> ResidualParts:
    f_val = source_f(pt)
    r = psi.dxx + psi.dyy + psi.v * psi.dy - f_val
    return ResidualParts(psi.v, psi.dy, psi.dxx, psi.dyy, f_val, r)


def residual(spec: LayerSpec, p: Params, pt) -> ResidualParts:
    return residual_of(trial_psi(spec, p, pt), pt)


def exact_residual(pt) -> ResidualParts:
    """Residual of the closed-form solution, bypassing the network."""
    return residual_of(exact_psi_generic(seed_point(pt)), pt)


def validation_grid(n: int):
    """Cell-centred uniform n x n grid on [0, 1]^2, as flat (x, y) arrays.

    Points are ordered with x varying slowest.
    """
    if n < 2:
        raise ValueError("grid size must be at least 2")
    g = (np.arange(n) + 0.5) / n
    xs, ys = np.meshgrid(g, g, indexing="ij")
    return xs.ravel(), ys.ravel()


def mae_of(approx, grid_n: int = 100) -> float:
    """Mean |approx - psi_th| over the validation grid; ``approx`` maps (x, y) arrays to values."""
    pt = validation_grid(grid_n)
    return float(np.mean(np.abs(approx(pt) - exact_psi(pt))))


def validate_mae(spec: LayerSpec, p: Params, grid_n: int = 100) -> float:
    """Mean |psi_ap - psi_th| over the validation grid."""
    return mae_of(lambda pt: trial_value(spec, p, pt), grid_n)


def neumann_mismatch(spec: LayerSpec, p: Params, n: int = 100) -> float:
    """Mean |d psi_ap / dy (x, 1) - 2 sin(pi x)| along the top edge.

    The lift and gate do not enforce this condition, so it is reported as a
    diagnostic.
    """
    x = (np.arange(n) + 0.5) / n
    psi = trial_psi(spec, p, (x, np.ones_like(x)))
    return float(np.mean(np.abs(psi.dy - 2.0 * np.sin(PI * x))))


def field_rows(spec: LayerSpec, p: Params, grid_n: int = 100):
    """Columns x, y, psi_ap, psi_th, abs_err on the validation grid."""
    pt = validation_grid(grid_n)
    ap = trial_value(spec, p, pt)
    th = exact_psi(pt)
    return pt[0], pt[1], ap, th, np.abs(ap - th)


def field_csv(spec: LayerSpec, p: Params, grid_n: int = 100) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "psi_ap", "psi_th", "abs_err"])
    for row in zip(*field_rows(spec, p, grid_n)):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()
