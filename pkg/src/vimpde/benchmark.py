"""Curvature-flow benchmark: the cone ``r - 1`` flowing on ``[2, 4]^2``.

The reference solutions are free-space ones, while the grid operators
impose a Neumann condition. Comparisons therefore use

* for VIM, only cells more than ``iterations`` cells from the edge: each
  update widens the domain of dependence by one cell, so those cells never
  see the boundary closure;
* for forward Euler, a Dirichlet ring carrying the exact solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import radial
from .diffusion import SpatialOperator
from .fd import fd_config_for, fd_solve
from .field import GridField, GridGeometry
from .vim import VimConfig, lift, vim_solve, vim_step

__all__ = [
    "ANNULUS",
    "annulus_geometry",
    "cone",
    "exact_field",
    "closed_form_field",
    "inner",
    "vim_iterate_errors",
    "SchemeRun",
    "vim_benchmark",
    "fd_benchmark",
    "richardson_estimate",
]

ANNULUS = ((2.0, 4.0), (2.0, 4.0))
SAFETY = 1.25


def annulus_geometry(h):
    return GridGeometry.covering(*ANNULUS, h)


def _radius(geometry):
    X, Y = geometry.mesh()
    return np.hypot(X, Y)


def cone(geometry):
    return GridField(geometry, _radius(geometry) - 1.0)


def exact_field(geometry, t):
    r = _radius(geometry)
    return np.sqrt(r * r + 2.0 * t) - 1.0


def closed_form_field(geometry, n, t):
    r = _radius(geometry)
    inc = np.zeros_like(r)
    for k in range(1, n + 1):
        inc += radial.SERIES_COEFFICIENTS[k - 1] * t**k / r ** (2 * k - 1)
    return r - 1.0 + inc


def inner(a, margin):
    return a[margin:-margin, margin:-margin] if margin else a


def vim_iterate_errors(h, time_nodes, horizon, iterations=3, op=None):
    """Max error of grid iterate ``n`` against the closed form, n = 1..iterations, at ``t = T``."""
    op = op or SpatialOperator.curvature()
    g = annulus_geometry(h)
    u0 = cone(g)
    cfg = VimConfig(iterations, time_nodes, horizon)
    current = lift(u0, cfg)
    errors = []
    for n in range(1, iterations + 1):
        current = vim_step(current, op, u0, cfg)
        ref = closed_form_field(g, n, horizon)
        errors.append(float(np.max(np.abs(inner(current.data[-1] - ref, iterations)))))
    return errors


@dataclass
class SchemeRun:
    geometry: GridGeometry
    solution: np.ndarray
    margin: int
    residuals: list

    def error(self, t):
        return float(np.max(np.abs(inner(self.solution - exact_field(self.geometry, t), self.margin))))


def vim_benchmark(h, time_nodes, horizon, iterations=3):
    g = annulus_geometry(h)
    res = vim_solve(cone(g), SpatialOperator.curvature(), VimConfig(iterations, time_nodes, horizon),
                    window=iterations)
    return SchemeRun(g, res.solution.data[-1], iterations, res.residuals)


def fd_benchmark(h, horizon, margin=0):
    g = annulus_geometry(h)
    op = SpatialOperator.curvature()
    cfg = fd_config_for(op, g, horizon)
    u = fd_solve(cone(g), op, cfg, dirichlet=lambda t: exact_field(g, t))
    return SchemeRun(g, u.values, margin, [])


def richardson_estimate(coarse, fine, order=2, safety=SAFETY):
    """Estimated max error of ``fine`` from a coarse/fine pair with ratio 2.

    Compares on the coarse run's window at coincident vertices.
    """
    m = max(coarse.margin, (fine.margin + 1) // 2)
    f = fine.solution[::2, ::2]
    diff = inner(coarse.solution - f, m)
    return safety * float(np.max(np.abs(diff))) / (2**order - 1)
