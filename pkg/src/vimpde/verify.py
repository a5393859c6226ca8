"""Self-contained verification suite for the curvature-flow benchmark."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import benchmark as bm
from . import radial
from .diffusion import SpatialOperator
from .field import GridField, GridGeometry
from .vim import VimConfig, lagrange_multiplier_first_order, lift, stationarity_conditions, vim_solve, vim_step

__all__ = [
    "Check",
    "Tolerances",
    "random_points",
    "closed_form_identity_error",
    "taylor_slope",
    "scalar_picard_gap",
    "grid_picard_gap",
    "exact_residual_max",
    "run_checks",
]


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    relation: str = "<="

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value:.6g} {self.relation} {self.tolerance:.6g}"


def _le(name, value, tol):
    return Check(name, float(value), float(tol), bool(value <= tol))


def _ge(name, value, tol):
    return Check(name, float(value), float(tol), bool(value >= tol), ">=")


@dataclass(frozen=True)
class Tolerances:
    closed_form: float = 1e-12
    scalar_picard: float = 1e-10
    grid: float = 5e-3
    order_ratio: float = 3.0
    slope: float = 0.1
    residual: float = 1e-5
    h: float = 0.02
    time_nodes: int = 64
    horizon: float = 0.1


def random_points(count, seed, r_range=(0.5, 10.0), t_range=(0.0, 1.0)):
    rng = np.random.default_rng(seed)
    r = rng.uniform(*r_range, count)
    theta = rng.uniform(0.0, 2.0 * math.pi, count)
    t = rng.uniform(*t_range, count)
    return [radial.RadialPoint(float(ri * math.cos(th)), float(ri * math.sin(th)), float(ti))
            for ri, th, ti in zip(r, theta, t)]


def closed_form_identity_error(n, points):
    """Worst disagreement between the series and the expanded forms.

    Relative to the sum of term magnitudes, which keeps the measure
    meaningful where the iterate itself passes through zero.
    """
    worst = 0.0
    for p in points:
        a = radial.closed_form_iterate(n, p)
        b = radial.verbatim_iterate(n, p)
        r = p.r
        scale = r + 1.0 + sum(abs(c) * p.t**k / r ** (2 * k - 1)
                              for k, c in enumerate(radial.SERIES_COEFFICIENTS[:n], start=1))
        worst = max(worst, abs(a - b) / scale)
    return worst


def taylor_slope(n, r=2.0, times=None):
    """Log-log slope of ``|u_n - exact|`` against ``t`` at fixed radius."""
    times = np.logspace(-3, -1, 9) if times is None else np.asarray(times)
    gaps = [abs(radial.exact_increment(r, t) - radial.series_increment(n, r, t)) for t in times]
    slope, _ = np.polyfit(np.log(times), np.log(gaps), 1)
    return float(slope)


def scalar_picard_gap(iterations=6, time_nodes=16, horizon=1.0):
    """Literal vs simplified update on ``u' = u``, ``u(0) = 1`` (on a 3x3 grid)."""
    geom = GridGeometry(3, 3)
    u0 = GridField.constant(geom, 1.0)
    cfg = VimConfig(iterations, time_nodes, horizon)
    literal = vim_solve(u0, lambda u: u, cfg, literal=True).solution.data
    simple = vim_solve(u0, lambda u: u, cfg).solution.data
    return float(np.max(np.abs(literal - simple)))


def grid_picard_gap(h=0.04, time_nodes=16, horizon=0.1, iterations=3):
    """Literal vs simplified update on the curvature benchmark, plus the iterate's own error."""
    g = bm.annulus_geometry(h)
    u0 = bm.cone(g)
    op = SpatialOperator.curvature()
    cfg = VimConfig(iterations, time_nodes, horizon)
    a = b = lift(u0, cfg)
    for _ in range(iterations):
        a = vim_step(a, op, u0, cfg, literal=True)
        b = vim_step(b, op, u0, cfg)
    gap = float(np.max(np.abs(bm.inner(a.data[-1] - b.data[-1], iterations))))
    truncation = float(np.max(np.abs(bm.inner(b.data[-1] - bm.closed_form_field(g, iterations, horizon),
                                                iterations))))
    return gap, truncation


def exact_residual_max(points, h=1e-3, dt=1e-3):
    return max(abs(radial.pde_residual(radial.exact_value, p, h, dt)) for p in points)


def run_checks(tol: Tolerances = Tolerances(), seed: int = 2024):
    checks = []
    points = random_points(10_000, seed)
    for n in (1, 2, 3):
        checks.append(_le(f"closed_form_identity_n{n}", closed_form_identity_error(n, points), tol.closed_form))

    lam = lagrange_multiplier_first_order()
    lam_dev = max(abs(lam + 1.0), *map(abs, stationarity_conditions(lam)))
    checks.append(_le("lagrange_multiplier", lam_dev, 0.0))
    checks.append(_le("picard_equivalence_scalar", scalar_picard_gap(), tol.scalar_picard))
    gap, trunc = grid_picard_gap()
    checks.append(_le("picard_equivalence_grid", gap, trunc))

    errors = bm.vim_iterate_errors(tol.h, tol.time_nodes, tol.horizon)
    for n, err in enumerate(errors, start=1):
        checks.append(_le(f"grid_iterate_n{n}", err, tol.grid))
    coarse = bm.vim_iterate_errors(2 * tol.h, max(2, tol.time_nodes // 2), tol.horizon)
    checks.append(_ge("grid_order_ratio", coarse[-1] / errors[-1], tol.order_ratio))

    for n in (1, 2, 3):
        checks.append(_le(f"taylor_slope_n{n}", abs(taylor_slope(n) - (n + 1)), tol.slope))
    checks.append(_le("exact_solution_residual", exact_residual_max(random_points(100, seed + 1)), tol.residual))
    return checks


def report_json(checks):
    return [asdict(c) for c in checks]
