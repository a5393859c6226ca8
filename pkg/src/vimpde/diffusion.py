"""Right-hand sides ``du/dt = F(u)`` of the nonlinear diffusion flows.

All operators return the forward-diffusion RHS directly, so a solver can
treat them interchangeably:

* Perona-Malik:       ``div(c(|grad u|) grad u)``
* Catte regularized:  ``div(g(|G_sigma * grad u|) grad u)``
* curvature flow:     ``(uy^2 uxx - 2 ux uy uxy + ux^2 uyy) / (ux^2 + uy^2 + eps)``
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import field as fc
from .errors import ParameterError
from .field import GaussianKernel, GridField

__all__ = [
    "DiffusivityKind",
    "DiffusivitySpec",
    "OperatorConfig",
    "OperatorTag",
    "SpatialOperator",
    "diffusivity_value",
    "pm_rhs",
    "catte_rhs",
    "curvature_rhs",
    "weighted_curvature_rhs",
    "DEFAULT_EPS",
]

DEFAULT_EPS = 1e-8


class DiffusivityKind(str, enum.Enum):
    RATIONAL = "rational"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class DiffusivitySpec:
    kind: DiffusivityKind = DiffusivityKind.RATIONAL
    k: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "kind", DiffusivityKind(self.kind))
        if not (self.k > 0) or not math.isfinite(self.k):
            raise ParameterError(f"contrast parameter k must be positive, got {self.k}")

    def __call__(self, s):
        """Vectorized diffusivity; ``s`` is a gradient magnitude (array or scalar)."""
        q = np.square(s / self.k)
        if self.kind is DiffusivityKind.RATIONAL:
            return 1.0 / (1.0 + q)
        return np.exp(-q)


def diffusivity_value(spec: DiffusivitySpec, s: float) -> float:
    """``1/(1+s^2/k^2)`` or ``exp(-s^2/k^2)``; always in (0, 1] (may underflow to 0 for huge s)."""
    if not (s >= 0):
        raise ParameterError(f"gradient magnitude must be non-negative, got {s}")
    return float(spec(float(s)))


def _check_eps(eps, strict=False):
    if not (eps >= 0) or not math.isfinite(eps):
        raise ParameterError(f"epsilon must be non-negative, got {eps}")
    if strict and eps == 0:
        raise ParameterError("curvature flow needs epsilon > 0: the denominator vanishes at critical points")


def pm_rhs(u: GridField, spec: DiffusivitySpec, eps: float = DEFAULT_EPS) -> GridField:
    _check_eps(eps)
    grad = fc.gradient(u)
    s = np.sqrt(grad.x * grad.x + grad.y * grad.y + eps)
    return fc.divergence(grad.scaled(spec(s)))


def _smoothed_magnitude(grad, kernel):
    gx = fc.convolve(GridField(grad.geometry, grad.x), kernel).values
    gy = fc.convolve(GridField(grad.geometry, grad.y), kernel).values
    return gx * gx + gy * gy


def catte_rhs(u: GridField, spec: DiffusivitySpec, kernel: GaussianKernel, eps: float = DEFAULT_EPS) -> GridField:
    """Perona-Malik flux with the diffusivity driven by the smoothed gradient.

    The flux is the vector ``g(.) * grad u``, as in the divergence form of
    the Perona-Malik equation.
    """
    _check_eps(eps)
    grad = fc.gradient(u)
    s = np.sqrt(_smoothed_magnitude(grad, kernel) + eps)
    return fc.divergence(grad.scaled(spec(s)))


def curvature_rhs(u: GridField, eps: float = DEFAULT_EPS) -> GridField:
    _check_eps(eps, strict=True)
    grad = fc.gradient(u)
    ux, uy = grad.x, grad.y
    uxx, uyy, uxy = fc.second_derivatives(u)
    num = uy * uy * uxx - 2.0 * ux * uy * uxy + ux * ux * uyy
    return u.like(num / (ux * ux + uy * uy + eps))


def weighted_curvature_rhs(u: GridField, spec: DiffusivitySpec, kernel: GaussianKernel | None = None,
                           eps: float = DEFAULT_EPS) -> GridField:
    """Curvature flow slowed down by ``g(|G_sigma * grad u|)``.

    Without a kernel the diffusivity sees the raw gradient. Only structural
    properties (zero on constants, bounded by the plain curvature term) are
    checked for this operator; there is no closed-form reference.
    """
    _check_eps(eps, strict=True)
    grad = fc.gradient(u)
    if kernel is None:
        s2 = grad.x * grad.x + grad.y * grad.y
    else:
        s2 = _smoothed_magnitude(grad, kernel)
    return u.like(spec(np.sqrt(s2 + eps)) * curvature_rhs(u, eps).values)


class OperatorTag(str, enum.Enum):
    PERONA_MALIK = "pm"
    CATTE = "catte"
    CURVATURE = "curvature"


@dataclass(frozen=True)
class OperatorConfig:
    epsilon: float = DEFAULT_EPS
    diffusivity: DiffusivitySpec | None = None
    sigma: float = 0.0

    def __post_init__(self):
        _check_eps(self.epsilon)
        if not (self.sigma >= 0):
            raise ParameterError(f"sigma must be non-negative, got {self.sigma}")


@dataclass(frozen=True)
class SpatialOperator:
    """A named RHS ``F``; calling it on a field evaluates ``F(u)``.

    For the curvature tag a diffusivity in the config turns on the
    g-weighted variant (with Gaussian pre-smoothing when ``sigma > 0``).
    """

    tag: OperatorTag
    config: OperatorConfig = field(default_factory=OperatorConfig)

    def __post_init__(self):
        object.__setattr__(self, "tag", OperatorTag(self.tag))
        cfg = self.config
        if self.tag in (OperatorTag.PERONA_MALIK, OperatorTag.CATTE) and cfg.diffusivity is None:
            raise ParameterError(f"{self.tag.value} operator needs a diffusivity")
        if self.tag is OperatorTag.CATTE and cfg.sigma <= 0:
            raise ParameterError("Catte regularization needs sigma > 0")
        if self.tag is OperatorTag.CURVATURE:
            _check_eps(cfg.epsilon, strict=True)

    @classmethod
    def perona_malik(cls, k=0.05, kind="rational", eps=DEFAULT_EPS):
        return cls(OperatorTag.PERONA_MALIK, OperatorConfig(eps, DiffusivitySpec(kind, k)))

    @classmethod
    def catte(cls, k=0.05, sigma=1.0, kind="rational", eps=DEFAULT_EPS):
        return cls(OperatorTag.CATTE, OperatorConfig(eps, DiffusivitySpec(kind, k), sigma))

    @classmethod
    def curvature(cls, eps=DEFAULT_EPS):
        return cls(OperatorTag.CURVATURE, OperatorConfig(eps))

    def kernel_for(self, geometry):
        return fc.gaussian_kernel(self.config.sigma, geometry.hx)

    def __call__(self, u: GridField) -> GridField:
        cfg = self.config
        if self.tag is OperatorTag.PERONA_MALIK:
            return pm_rhs(u, cfg.diffusivity, cfg.epsilon)
        if self.tag is OperatorTag.CATTE:
            return catte_rhs(u, cfg.diffusivity, self.kernel_for(u.geometry), cfg.epsilon)
        if cfg.diffusivity is None:
            return curvature_rhs(u, cfg.epsilon)
        kernel = self.kernel_for(u.geometry) if cfg.sigma > 0 else None
        return weighted_curvature_rhs(u, cfg.diffusivity, kernel, cfg.epsilon)
