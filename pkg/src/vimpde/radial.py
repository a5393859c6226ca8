"""Closed-form reference values for curvature flow of the cone ``u0 = r - 1``.

The first three VIM iterates for this problem are known in closed form.
Two renderings are kept on purpose: the expanded polynomial quotients
(``verbatim_iterate``) and the compact radial series

    u_n = r - 1 + sum_{k=1..n} c_k t^k / r^(2k-1),   c = (1, -1/2, 1/2),

so that a transcription slip in either one shows up as a disagreement.

The exact solution ``sqrt(r^2 + 2t) - 1`` (each circle of radius rho shrinks
as rho^2 - 2t) is not part of the closed-form set; ``pde_residual`` exists to
validate it before it is used to judge anything else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError, SingularityError

__all__ = [
    "RadialPoint",
    "SERIES_COEFFICIENTS",
    "closed_form_iterate",
    "verbatim_iterate",
    "series_increment",
    "exact_solution",
    "exact_value",
    "exact_increment",
    "pde_residual",
]

SERIES_COEFFICIENTS = (1.0, -0.5, 0.5)


@dataclass(frozen=True)
class RadialPoint:
    x: float
    y: float
    t: float = 0.0

    def __post_init__(self):
        if self.t < 0:
            raise ParameterError(f"t must be non-negative, got {self.t}")

    @property
    def r(self):
        return math.hypot(self.x, self.y)


def _radius(p):
    r = p.r
    if r == 0:
        raise SingularityError("closed forms are singular at the origin")
    return r


def _check_order(n):
    if n not in (0, 1, 2, 3):
        raise ParameterError(f"closed-form iterates exist for n in 0..3, got {n}")


def series_increment(n: int, r: float, t: float) -> float:
    """``u_n - u0`` in radial series form, summed without cancellation against ``r - 1``."""
    _check_order(n)
    total = 0.0
    for k in range(1, n + 1):
        total += SERIES_COEFFICIENTS[k - 1] * t**k / r ** (2 * k - 1)
    return total


def closed_form_iterate(n: int, p: RadialPoint) -> float:
    _check_order(n)
    r = _radius(p)
    return r - 1.0 + series_increment(n, r, p.t)


def verbatim_iterate(n: int, p: RadialPoint) -> float:
    """The iterates as expanded polynomial quotients in ``x``, ``y``, ``t``."""
    _check_order(n)
    x, y, t = p.x, p.y, p.t
    _radius(p)
    s = math.sqrt(x**2 + y**2)
    if n == 0:
        return s - 1.0
    if n == 1:
        return (x**2 + y**2 + t - s) / s
    if n == 2:
        num = (2 * x**4 + 2 * x**2 * t - 2 * x**2 * s + 4 * x**2 * y**2 + 2 * y**4 + 2 * y**2 * t
               - t**2 - 2 * s * y**2)
        return num / (2 * (x**2 + y**2) ** 1.5)
    num = (2 * x**6 + 6 * x**4 * y**2 - 2 * s * x**4 + 2 * t * x**4 + 6 * y**4 * x**2
           - 4 * s * x**2 * y**2 - x**2 * t**2 + 4 * x**2 * y**2 * t - 2 * s * y**4 + t**3
           + 2 * y**4 * t - t**2 * y**2 + 2 * y**6)
    return num / (2 * (x**2 + y**2) ** 2.5)


def exact_increment(r: float, t: float) -> float:
    """``exact_solution - u0`` written as ``2t / (sqrt(r^2+2t) + r)`` to avoid cancellation."""
    return 2.0 * t / (math.sqrt(r * r + 2.0 * t) + r)


def exact_value(x: float, y: float, t: float) -> float:
    """``sqrt(x^2 + y^2 + 2t) - 1``; also defined slightly before ``t = 0``."""
    arg = x * x + y * y + 2.0 * t
    if not arg > 0:
        raise SingularityError(f"exact solution undefined for x^2+y^2+2t = {arg}")
    return math.sqrt(arg) - 1.0


def exact_solution(p: RadialPoint) -> float:
    return exact_value(p.x, p.y, p.t)


def pde_residual(candidate, p: RadialPoint, h: float = 1e-3, dt: float = 1e-3) -> float:
    """Finite-difference estimate of ``u_t - RHS`` for ``candidate(x, y, t)``.

    Central differences in all variables, the mixed derivative by the
    four-corner stencil; the error is O(h^2 + dt^2) for smooth candidates.
    Points with ``t < dt`` sample the candidate slightly before ``t = 0``.
    """
    if not (h > 0 and dt > 0):
        raise ParameterError("h and dt must be positive")
    x, y, t = p.x, p.y, p.t
    if abs(x) <= h and abs(y) <= h:
        raise SingularityError(f"stencil of half-width {h} around ({x}, {y}) contains the origin")

    def u(dx=0.0, dy=0.0, ds=0.0):
        return candidate(x + dx, y + dy, t + ds)

    c = u()
    ut = (u(ds=dt) - u(ds=-dt)) / (2 * dt)
    ux = (u(dx=h) - u(dx=-h)) / (2 * h)
    uy = (u(dy=h) - u(dy=-h)) / (2 * h)
    uxx = (u(dx=h) - 2 * c + u(dx=-h)) / h**2
    uyy = (u(dy=h) - 2 * c + u(dy=-h)) / h**2
    uxy = (u(h, h) - u(-h, h) - u(h, -h) + u(-h, -h)) / (4 * h * h)
    grad2 = ux * ux + uy * uy
    if grad2 == 0:
        raise SingularityError(f"candidate has a critical point at ({x}, {y}, {t})")
    rhs = (uy * uy * uxx - 2 * ux * uy * uxy + ux * ux * uyy) / grad2
    return ut - rhs
