"""Explicit forward-Euler baseline used to cross-check the VIM solver."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, ParameterError
from .field import GridField, GridGeometry

__all__ = ["FdConfig", "cfl_max_dt", "fd_solve", "fd_config_for"]

# Every diffusivity is bounded by 1; the curvature operator uses the same bound.
C_MAX = 1.0


@dataclass(frozen=True)
class FdConfig:
    dt: float
    steps: int

    def __post_init__(self):
        if not (self.dt > 0) or not math.isfinite(self.dt):
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if self.steps < 1:
            raise ParameterError(f"steps must be positive, got {self.steps}")

    @property
    def horizon(self):
        return self.dt * self.steps


def cfl_max_dt(op, geometry: GridGeometry) -> float:
    """Largest stable explicit step, ``h^2 / (4 c_max)`` with ``h = min(hx, hy)``."""
    h = min(geometry.hx, geometry.hy)
    return h * h / (4.0 * C_MAX)


def fd_config_for(op, geometry, horizon, dt=None):
    """Config reaching ``horizon`` exactly with the fewest steps not exceeding ``dt`` (default: CFL bound)."""
    limit = cfl_max_dt(op, geometry) if dt is None else dt
    steps = max(1, math.ceil(horizon / limit - 1e-9))
    return FdConfig(horizon / steps, steps)


def fd_solve(u0: GridField, op, cfg: FdConfig, dirichlet=None) -> GridField:
    """Forward Euler ``u <- u + dt F(u)`` for ``cfg.steps`` steps.

    ``dirichlet(t)`` may return an array of boundary values; its outer ring
    then overwrites the solution's outer ring after every step. Used by the
    curvature benchmark, whose reference solution does not satisfy the
    Neumann condition.
    """
    limit = cfl_max_dt(op, u0.geometry)
    if cfg.dt > limit * (1 + 1e-12):
        raise ParameterError(f"dt={cfg.dt:.6g} exceeds the stability bound {limit:.6g}")
    u = u0.values.copy()
    for step in range(1, cfg.steps + 1):
        try:
            rhs = op(GridField(u0.geometry, u)).values
        except DivergenceError as exc:
            raise DivergenceError(f"non-finite value at step {step}", index=step) from exc
        with np.errstate(over="ignore", invalid="ignore"):
            u = u + cfg.dt * rhs
        if dirichlet is not None:
            ring = np.asarray(dirichlet(step * cfg.dt), dtype=np.float64)
            u[0, :], u[-1, :] = ring[0, :], ring[-1, :]
            u[:, 0], u[:, -1] = ring[:, 0], ring[:, -1]
        if not np.isfinite(u).all():
            raise DivergenceError(f"non-finite value at step {step}", index=step)
    return GridField(u0.geometry, u)
