"""Variational iteration solvers for nonlinear diffusion and image restoration."""

from .diffusion import DiffusivitySpec, OperatorConfig, SpatialOperator, catte_rhs, curvature_rhs, pm_rhs
from .errors import DimensionError, DivergenceError, ParameterError, PgmParseError, SingularityError
from .fd import FdConfig, cfl_max_dt, fd_solve
from .field import GaussianKernel, GridField, GridGeometry, VectorField, convolve, divergence, gaussian_kernel, gradient
from .vim import TimeGridField, VimConfig, lagrange_multiplier_first_order, vim_solve, vim_step

__version__ = "0.1.0"
