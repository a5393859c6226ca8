"""Uniform-grid scalar fields and the discrete operators acting on them.

Cell ``(i, j)`` sits at ``(x0 + i*hx, y0 + j*hy)``. Values are stored as a
``(ny, nx)`` float64 array, so the flattened (C-order) index of cell
``(i, j)`` is ``j*nx + i``.

Boundary handling realizes the homogeneous Neumann condition:

* ``gradient`` and the second differences mirror the field about the
  boundary cell, ``f(-1) = f(1)``, so normal derivatives vanish there.
* ``divergence`` uses half-sample ghost values ``v(-1) = v(0)``. For vector
  fields whose normal component is zero on boundary cells (every gradient
  produced here) the grid sum of the divergence is exactly zero.
* ``convolve`` pads half-sample symmetrically, which preserves the grid sum.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DivergenceError, ParameterError

__all__ = [
    "GridGeometry",
    "GridField",
    "VectorField",
    "GaussianKernel",
    "gradient",
    "divergence",
    "second_derivatives",
    "gaussian_kernel",
    "convolve",
]


@dataclass(frozen=True)
class GridGeometry:
    nx: int
    ny: int
    hx: float = 1.0
    hy: float = 1.0
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny:
            raise DimensionError(f"grid dimensions must be integers, got {self.nx}x{self.ny}")
        if self.nx < 3 or self.ny < 3:
            raise DimensionError(f"grid needs at least 3x3 cells, got {self.nx}x{self.ny}")
        if not (self.hx > 0 and self.hy > 0) or not math.isfinite(self.hx + self.hy):
            raise DimensionError(f"grid spacings must be positive, got hx={self.hx}, hy={self.hy}")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @classmethod
    def covering(cls, x_range, y_range, h):
        """Vertex grid with spacing ``h`` whose first and last cells sit on the range ends."""
        (xa, xb), (ya, yb) = x_range, y_range
        nx = int(round((xb - xa) / h)) + 1
        ny = int(round((yb - ya) / h)) + 1
        return cls(nx, ny, h, h, (xa, ya))

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def size(self):
        return self.nx * self.ny

    def axes(self):
        x = self.origin[0] + self.hx * np.arange(self.nx)
        y = self.origin[1] + self.hy * np.arange(self.ny)
        return x, y

    def mesh(self):
        """Coordinate arrays ``(X, Y)``, each of shape ``(ny, nx)``."""
        x, y = self.axes()
        return np.meshgrid(x, y, indexing="xy")

    def refined(self):
        """Geometry with half the spacing covering the same vertices."""
        return GridGeometry(2 * self.nx - 1, 2 * self.ny - 1, self.hx / 2, self.hy / 2, self.origin)


@dataclass(frozen=True, eq=False)
class GridField:
    geometry: GridGeometry
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1 and values.size == self.geometry.size:
            values = values.reshape(self.geometry.shape)
        if values.shape != self.geometry.shape:
            raise DimensionError(
                f"values of shape {values.shape} do not fit a {self.geometry.nx}x{self.geometry.ny} grid"
            )
        if not np.isfinite(values).all():
            raise DivergenceError("field contains non-finite values")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, geometry, func):
        X, Y = geometry.mesh()
        return cls(geometry, func(X, Y))

    @classmethod
    def constant(cls, geometry, value):
        return cls(geometry, np.full(geometry.shape, float(value)))

    def like(self, values):
        return GridField(self.geometry, values)

    def flat(self):
        return self.values.reshape(-1)

    def __repr__(self):
        g = self.geometry
        return f"GridField({g.nx}x{g.ny}, h=({g.hx}, {g.hy}), range=[{self.values.min():.6g}, {self.values.max():.6g}])"


@dataclass(frozen=True, eq=False)
class VectorField:
    geometry: GridGeometry
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        comps = []
        for comp in (self.x, self.y):
            comp = np.asarray(comp, dtype=np.float64)
            if comp.shape != self.geometry.shape:
                raise DimensionError(f"component of shape {comp.shape} does not fit grid {self.geometry.shape}")
            if not np.isfinite(comp).all():
                raise DivergenceError("vector field contains non-finite values")
            comps.append(comp)
        object.__setattr__(self, "x", comps[0])
        object.__setattr__(self, "y", comps[1])

    def magnitude(self):
        return GridField(self.geometry, np.sqrt(self.x * self.x + self.y * self.y))

    def scaled(self, factor):
        """Multiply both components by a scalar or a per-cell array."""
        factor = factor.values if isinstance(factor, GridField) else factor
        return VectorField(self.geometry, self.x * factor, self.y * factor)

    def with_reflected_boundary(self):
        """Copy whose normal component vanishes on boundary cells.

        This is what mirror symmetry about the boundary cell forces on a vector
        field; gradients produced by :func:`gradient` already satisfy it.
        """
        x = self.x.copy()
        y = self.y.copy()
        x[:, 0] = x[:, -1] = 0.0
        y[0, :] = y[-1, :] = 0.0
        return VectorField(self.geometry, x, y)


def _central(a, h, axis):
    # mirrored ghosts make the boundary difference exactly zero
    out = np.zeros_like(a)
    if axis == 1:
        out[:, 1:-1] = (a[:, 2:] - a[:, :-2]) / (2.0 * h)
    else:
        out[1:-1, :] = (a[2:, :] - a[:-2, :]) / (2.0 * h)
    return out


def _central_half_sample(a, h, axis):
    out = np.empty_like(a)
    if axis == 1:
        out[:, 1:-1] = a[:, 2:] - a[:, :-2]
        out[:, 0] = a[:, 1] - a[:, 0]
        out[:, -1] = a[:, -1] - a[:, -2]
    else:
        out[1:-1, :] = a[2:, :] - a[:-2, :]
        out[0, :] = a[1, :] - a[0, :]
        out[-1, :] = a[-1, :] - a[-2, :]
    return out / (2.0 * h)


def _second(a, h, axis):
    out = np.empty_like(a)
    if axis == 1:
        out[:, 1:-1] = a[:, 2:] - 2.0 * a[:, 1:-1] + a[:, :-2]
        out[:, 0] = 2.0 * (a[:, 1] - a[:, 0])
        out[:, -1] = 2.0 * (a[:, -2] - a[:, -1])
    else:
        out[1:-1, :] = a[2:, :] - 2.0 * a[1:-1, :] + a[:-2, :]
        out[0, :] = 2.0 * (a[1, :] - a[0, :])
        out[-1, :] = 2.0 * (a[-2, :] - a[-1, :])
    return out / (h * h)


def gradient(f: GridField) -> VectorField:
    """Central-difference gradient with mirrored (Neumann) boundaries."""
    g = f.geometry
    return VectorField(g, _central(f.values, g.hx, axis=1), _central(f.values, g.hy, axis=0))


def divergence(v: VectorField) -> GridField:
    """Central-difference divergence with half-sample ghost values.

    Constant fields map to zero, and the grid sum vanishes whenever the
    normal components on the boundary cells do.
    """
    g = v.geometry
    return GridField(g, _central_half_sample(v.x, g.hx, axis=1) + _central_half_sample(v.y, g.hy, axis=0))


def second_derivatives(f: GridField):
    """Return ``(fxx, fyy, fxy)`` as arrays.

    ``fxx`` and ``fyy`` use the compact three-point stencil; ``fxy`` is the
    y-central difference of the x-central difference (four-corner stencil).
    """
    g = f.geometry
    a = f.values
    fxx = _second(a, g.hx, axis=1)
    fyy = _second(a, g.hy, axis=0)
    fxy = _central(_central(a, g.hx, axis=1), g.hy, axis=0)
    return fxx, fyy, fxy


@dataclass(frozen=True, eq=False)
class GaussianKernel:
    sigma: float
    h: float
    radius: int
    weights: np.ndarray

    @property
    def center(self):
        return float(self.weights[self.radius, self.radius])


@functools.lru_cache(maxsize=64)
def gaussian_kernel(sigma: float, h: float = 1.0) -> GaussianKernel:
    """Sampled Gaussian truncated at ``ceil(3*sigma/h)`` cells and renormalized."""
    if not (sigma > 0) or not math.isfinite(sigma):
        raise ParameterError(f"sigma must be positive, got {sigma}")
    if not (h > 0) or not math.isfinite(h):
        raise ParameterError(f"h must be positive, got {h}")
    # round first so that 3*0.1/0.1 style ratios do not pick up an extra cell
    radius = max(1, math.ceil(round(3.0 * sigma / h, 9)))
    offsets = h * np.arange(-radius, radius + 1, dtype=np.float64)
    profile = np.exp(-(offsets * offsets) / (2.0 * sigma * sigma))
    weights = np.outer(profile, profile)
    weights /= weights.sum()
    weights.setflags(write=False)
    return GaussianKernel(float(sigma), float(h), radius, weights)


def convolve(f: GridField, kernel: GaussianKernel) -> GridField:
    g = f.geometry
    r = kernel.radius
    if r >= min(g.nx, g.ny):
        raise DimensionError(f"kernel radius {r} too large for a {g.nx}x{g.ny} grid")
    if not (math.isclose(g.hx, kernel.h) and math.isclose(g.hy, kernel.h)):
        raise DimensionError(f"kernel built for h={kernel.h} applied to grid with h=({g.hx}, {g.hy})")
    padded = np.pad(f.values, r, mode="symmetric")
    out = np.zeros(g.shape)
    ny, nx = g.shape
    w = kernel.weights
    for a in range(2 * r + 1):
        for b in range(2 * r + 1):
            out += w[a, b] * padded[a:a + ny, b:b + nx]
    return GridField(g, out)
