"""Variational iteration on a time grid.

For a first-order-in-time problem ``u_t = F(u)`` the correction functional

    u_{n+1}(t) = u_n(t) + int_0^t lam(s) (du_n/ds - F(u_n(s))) ds

is made stationary by ``lam = -1``, after which it collapses to the Picard
map ``u_{n+1}(t) = u0 + int_0^t F(u_n(s)) ds``. Iterates are stored at
``M + 1`` uniform nodes on ``[0, T]`` and the integral is a cumulative
composite trapezoid, so every prefix integral uses the same partial sums.

The literal form (with the ``du_n/ds`` term) is kept for verification only.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DivergenceError, ParameterError, SingularityError
from .field import GridField, GridGeometry

__all__ = [
    "VimConfig",
    "TimeGridField",
    "VimResult",
    "lagrange_multiplier_first_order",
    "stationarity_conditions",
    "lift",
    "vim_step",
    "vim_solve",
    "vim_residual_history",
    "vim_march",
    "radial_vim_coefficients",
    "radial_vim_iterate",
]

log = logging.getLogger(__name__)


def stationarity_conditions(lam):
    """Residuals of the conditions fixing a constant multiplier ``lam``.

    Varying the correction functional with the nonlinear term held fixed
    (restricted variation) leaves ``du_{n+1} = du_n + int lam d(du_n/ds) ds``.
    Integrating by parts gives ``(1 + lam(t)) du_n(t) - int lam'(s) du_n ds``,
    which vanishes for every variation iff ``lam' = 0`` on ``(0, t)`` and
    ``lam(t) + 1 = 0`` at the end point. Returns ``(lam', lam(t) + 1)``.
    """
    lam = float(lam)
    return 0.0, lam + 1.0


def lagrange_multiplier_first_order() -> float:
    """The optimal multiplier for ``u_t = F(u)``: the constant ``-1``."""
    lam = -1.0
    assert stationarity_conditions(lam) == (0.0, 0.0)
    return lam


@dataclass(frozen=True)
class VimConfig:
    iterations: int = 13
    time_nodes: int = 16
    horizon: float = 1.0
    quadrature: str = "trapezoid"
    lagrange: float = -1.0

    def __post_init__(self):
        if self.iterations < 1:
            raise ParameterError(f"need at least one iteration, got {self.iterations}")
        if self.time_nodes < 2:
            raise ParameterError(f"need at least 2 time intervals, got {self.time_nodes}")
        if not (self.horizon > 0) or not math.isfinite(self.horizon):
            raise ParameterError(f"horizon must be positive, got {self.horizon}")
        if self.quadrature != "trapezoid":
            raise ParameterError(f"unsupported quadrature {self.quadrature!r}")
        if self.lagrange != lagrange_multiplier_first_order():
            raise ParameterError("first-order-in-time problems require lagrange = -1")

    @property
    def dt(self):
        return self.horizon / self.time_nodes

    def times(self):
        return self.dt * np.arange(self.time_nodes + 1)


@dataclass(frozen=True, eq=False)
class TimeGridField:
    """A field sampled at uniform time nodes; ``data[j]`` is the frame at ``times[j]``."""

    geometry: GridGeometry
    times: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != (len(self.times),) + self.geometry.shape:
            raise ParameterError(f"frame stack of shape {self.data.shape} does not match the time grid")

    @property
    def frames(self):
        return [GridField(self.geometry, d) for d in self.data]

    def frame(self, j):
        return GridField(self.geometry, self.data[j])

    @property
    def final(self):
        return self.frame(-1)


def lift(u0: GridField, cfg: VimConfig) -> TimeGridField:
    """Constant-in-time extension ``u_0(x, t) = u0(x)``, the zeroth iterate."""
    times = cfg.times()
    data = np.broadcast_to(u0.values, (len(times),) + u0.geometry.shape).copy()
    return TimeGridField(u0.geometry, times, data)


def _rhs_frames(prev, op):
    out = np.empty_like(prev.data)
    for j in range(len(prev.times)):
        try:
            out[j] = op(prev.frame(j)).values
        except DivergenceError as exc:
            raise DivergenceError(f"non-finite value at time node {j} (t={prev.times[j]:.6g})", index=j) from exc
    return out


def vim_step(prev: TimeGridField, op, u0: GridField, cfg: VimConfig, literal: bool = False) -> TimeGridField:
    """One correction-functional update; ``op`` maps a GridField to ``F(u)``.

    With ``literal=True`` the full functional is evaluated: ``du_n/ds`` by
    forward differences between nodes, integrated with the midpoint rule,
    and ``F`` by the trapezoid rule. Otherwise the simplified Picard form.
    """
    if prev.geometry != u0.geometry:
        raise ParameterError("iterate and initial condition live on different grids")
    if not np.array_equal(prev.data[0], u0.values):
        raise ParameterError("iterate at t=0 does not match the initial condition")
    dt = cfg.dt
    rhs = _rhs_frames(prev, op)
    integral = np.zeros_like(rhs)
    for j in range(1, len(prev.times)):
        integral[j] = integral[j - 1] + 0.5 * dt * (rhs[j - 1] + rhs[j])

    if literal:
        lam = cfg.lagrange
        drift = np.zeros_like(rhs)
        for j in range(1, len(prev.times)):
            drift[j] = drift[j - 1] + dt * ((prev.data[j] - prev.data[j - 1]) / dt)
        data = prev.data + lam * (drift - integral)
    else:
        data = u0.values + integral
    data[0] = u0.values

    bad = ~np.isfinite(data).reshape(len(prev.times), -1).all(axis=1)
    if bad.any():
        j = int(np.argmax(bad))
        raise DivergenceError(f"non-finite value at time node {j} (t={prev.times[j]:.6g})", index=j)
    return TimeGridField(prev.geometry, prev.times, data)


@dataclass
class VimResult:
    solution: TimeGridField
    residuals: list = field(default_factory=list)

    @property
    def diverging(self):
        """True when the last Cauchy residual failed to decrease."""
        r = self.residuals
        return len(r) >= 2 and r[-1] >= r[-2] and r[-1] > 0


def vim_solve(u0: GridField, op, cfg: VimConfig, literal: bool = False, window: int = 0) -> VimResult:
    """Run ``cfg.iterations`` updates from the constant lift of ``u0``.

    ``residuals[n]`` is ``max |u_{n+1}(T) - u_n(T)|``, taken over cells at
    least ``window`` cells away from the edge (0 = whole grid). A
    non-decreasing tail is logged and flagged on the result, never clamped.
    """
    inner = (slice(window, -window), slice(window, -window)) if window else (slice(None), slice(None))
    current = lift(u0, cfg)
    residuals = []
    for n in range(cfg.iterations):
        try:
            nxt = vim_step(current, op, u0, cfg, literal=literal)
        except DivergenceError as exc:
            raise DivergenceError(f"iterate {n + 1}: {exc}", index=n + 1) from exc
        residuals.append(float(np.max(np.abs(nxt.data[-1][inner] - current.data[-1][inner]))))
        current = nxt
    result = VimResult(current, residuals)
    if result.diverging:
        log.warning("VIM residuals stopped decreasing (last two: %.3e, %.3e)", residuals[-2], residuals[-1])
    return result


def vim_residual_history(result: VimResult) -> list:
    if len(result.residuals) < 2:
        raise ParameterError("a residual history needs at least two iterations")
    return list(result.residuals)


def vim_march(u0: GridField, op, cfg: VimConfig, targets):
    """Advance through increasing ``targets`` with consecutive VIM windows.

    Each window spans at most ``cfg.horizon`` and restarts the iteration from
    the previous window's final frame. Yields ``(t, field, results)`` per
    target where ``results`` holds one :class:`VimResult` per window; a
    target of 0 yields ``u0`` unchanged.
    """
    t_now = 0.0
    u = u0
    for target in targets:
        if target < t_now:
            raise ParameterError(f"targets must be non-decreasing, got {target} after {t_now}")
        span = target - t_now
        results = []
        if span > 0:
            stages = max(1, math.ceil(span / cfg.horizon - 1e-9))
            stage_cfg = VimConfig(cfg.iterations, cfg.time_nodes, span / stages, cfg.quadrature, cfg.lagrange)
            for s in range(stages):
                try:
                    res = vim_solve(u, op, stage_cfg)
                except DivergenceError as exc:
                    raise DivergenceError(f"window {s + 1}/{stages} towards t={target}: {exc}",
                                          index=exc.index) from exc
                results.append(res)
                u = res.solution.final
        t_now = target
        yield target, u, results


def radial_vim_coefficients(n: int):
    """Exact coefficients of the ``n``-th iterate for curvature flow of ``r - 1``.

    For radial ``u = f(r, t)`` the curvature operator reduces to ``f_r / r``.
    If ``u_n = r - 1 + sum_k a_k t^k r^(1-2k)`` then one Picard update gives
    ``a_1 = 1`` and ``a_{k+1} = a_k (1 - 2k) / (k + 1)``; this is the
    iteration carried out in exact rational arithmetic, without a mesh.
    """
    if n < 0:
        raise ParameterError(f"iterate index must be non-negative, got {n}")
    coeffs = []
    for _ in range(n):
        new = [Fraction(1)]
        for k, a in enumerate(coeffs, start=1):
            new.append(a * (1 - 2 * k) / (k + 1))
        coeffs = new
    return coeffs


def radial_vim_iterate(n: int, x, y, t):
    """Evaluate the mesh-free ``n``-th iterate at arrays of points."""
    x, y, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(t, float))
    r = np.hypot(x, y)
    if np.any(r == 0):
        raise SingularityError("radial iterates are singular at the origin")
    z = t / (r * r)
    acc = np.zeros_like(r)
    for a in reversed(radial_vim_coefficients(n)):
        acc = (acc + float(a)) * z
    return r - 1.0 + r * acc
