"""Sharp negative-moment inequalities for weighted sums of uniform random variables.

The package computes ``E|a_1 U_1 + ... + a_n U_n|^{-p}`` for ``0 < p < 1``
by three independent routes (exact piecewise-polynomial densities, Fourier
quadrature and Monte Carlo on the sphere), compares it with the sharp
constant ``C_p`` and checks the auxiliary inequalities numerically.
"""

__version__ = "0.1.0"

from .errors import AccuracyError, CapabilityError, DomainError, KhinlabError, PreconditionError
from .polydensity import (
    PiecewisePolyDensity,
    WeightVector,
    build_density,
    exact_neg_moment,
    slice_volume,
    two_point_moment,
)
from .specfun import C_p, DEFAULT_P_GRID, c2, c_inf, constants, p0

__all__ = [
    "AccuracyError",
    "CapabilityError",
    "C_p",
    "DEFAULT_P_GRID",
    "DomainError",
    "KhinlabError",
    "PiecewisePolyDensity",
    "PreconditionError",
    "WeightVector",
    "build_density",
    "c2",
    "c_inf",
    "constants",
    "exact_neg_moment",
    "p0",
    "slice_volume",
    "two_point_moment",
]
