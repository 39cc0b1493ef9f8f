"""Special functions and the closed-form constants of the L_{-p}-L_2 inequality.

All functions take the moment order ``p`` as a plain float and check that it
lies in the open unit interval unless stated otherwise.

>>> round(c2(0.5), 6), round(c_inf(0.5), 6)
(2.242391, 2.263782)
>>> cp_branch(0.5), cp_branch(0.9)
('c_inf', 'c2')
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, KhinlabError

SQRT_PI = math.sqrt(math.pi)


def _check_p(p):
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"moment order p must lie in (0, 1), got {p!r}")
    return p


def gamma(x):
    """Euler's gamma function for positive real ``x``.

    Backed by :func:`math.gamma`, which is accurate to a few ulp on (0, 171).
    """
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"gamma is only provided for x > 0, got {x!r}")
    return math.gamma(x)


def c2(p):
    """Two-summand constant ``E|(U1+U2)/sqrt(2)|^{-p} = 2^{1-p/2}/((1-p)(2-p))``."""
    p = _check_p(p)
    return 2.0 ** (1.0 - p / 2.0) / ((1.0 - p) * (2.0 - p))


def c_inf(p):
    """Gaussian constant ``E|Z/sqrt(3)|^{-p} = (3/2)^{p/2} Gamma((1-p)/2)/sqrt(pi)``."""
    p = _check_p(p)
    return 1.5 ** (p / 2.0) * math.gamma((1.0 - p) / 2.0) / SQRT_PI


def C_p(p):
    """Sharp constant ``max(c2(p), c_inf(p))``."""
    return max(c2(p), c_inf(p))


def cp_branch(p):
    """Name of the constant attaining ``C_p``: ``"c2"`` or ``"c_inf"``."""
    return "c2" if c2(p) >= c_inf(p) else "c_inf"


def c2_cinf_sign_function(p):
    """``2 sqrt(pi) 3^{-p/2} - (1-p)(2-p) Gamma((1-p)/2)``.

    Positive multiples separate this from ``c2(p) - c_inf(p)``, so both have the
    same sign on (0, 1).  Unlike the difference of constants it stays bounded
    as p -> 1 and is accepted on the closed interval [0, 1].
    """
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    if p == 1.0:
        # u Gamma(u) -> 1 as u -> 0 with u = (1-p)/2
        return 2.0 * SQRT_PI / math.sqrt(3.0) - 2.0
    return 2.0 * SQRT_PI * 3.0 ** (-p / 2.0) - (1.0 - p) * (2.0 - p) * math.gamma((1.0 - p) / 2.0)


def count_sign_changes_c2_cinf(lo=1e-4, hi=1.0 - 1e-4, num=2001):
    """Number of sign changes of ``c2 - c_inf`` seen on a uniform grid of (lo, hi)."""
    grid = np.linspace(lo, hi, num)
    signs = np.sign([c2_cinf_sign_function(p) for p in grid])
    signs = signs[signs != 0]
    return int(np.count_nonzero(np.diff(signs)))


@lru_cache(maxsize=1)
def p0():
    """The unique p in (0, 1) where ``c2(p) == c_inf(p)`` (about 0.7930).

    The sign function is negative at p = 2/3 and positive at p = 1, which
    brackets the root; Brent's method then converges to machine precision.
    """
    f = c2_cinf_sign_function
    lo, hi = 2.0 / 3.0, 1.0 - 1e-12
    if not (f(lo) < 0.0 < f(hi)):
        raise KhinlabError("failed to bracket p0")
    return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def sigma_p_power(p):
    """``sigma_p^p = 2^{-1-p/2} pi^{-1/2} (1-p)(2-p) Gamma((1-p)/2)``."""
    p = _check_p(p)
    return 2.0 ** (-1.0 - p / 2.0) / SQRT_PI * (1.0 - p) * (2.0 - p) * math.gamma((1.0 - p) / 2.0)


def sigma_p(p):
    """Width of the Gaussian ``exp(-sigma^2 t^2)`` matching ``sinc^2`` in the p-th weighted integral."""
    return sigma_p_power(p) ** (1.0 / float(p))


def b_pd(p, d):
    """Normalising constant ``2^{-p} pi^{-d/2} Gamma((d-p)/2) / Gamma(p/2)``.

    It turns ``int phi_X(t) |t|^{p-d} dt`` over R^d into ``E|X|^{-p}``.
    Requires ``0 < p < d``.
    """
    p = float(p)
    if int(d) != d or d < 1:
        raise DomainError(f"dimension d must be a positive integer, got {d!r}")
    if not 0.0 < p < d:
        raise DomainError(f"need 0 < p < d, got p={p!r}, d={d!r}")
    return 2.0 ** (-p) * math.pi ** (-d / 2.0) * math.gamma((d - p) / 2.0) / math.gamma(p / 2.0)


def gaussian_neg_moment(p):
    """``E|Z|^{-p} = 2^{-p/2} Gamma((1-p)/2) / sqrt(pi)`` for standard normal Z."""
    p = _check_p(p)
    return 2.0 ** (-p / 2.0) * math.gamma((1.0 - p) / 2.0) / SQRT_PI


def alpha_p(p):
    """Reciprocal ``1 / E|Z|^{-p}`` used in the Gaussian embedding of norms."""
    return 1.0 / gaussian_neg_moment(p)


def gamma_lemma_margin(p):
    """``(1-p)(2-p) Gamma((1-p)/2) - 2^{(3-p)/2}``; nonnegative on (0, 1)."""
    p = _check_p(p)
    return (1.0 - p) * (2.0 - p) * math.gamma((1.0 - p) / 2.0) - 2.0 ** ((3.0 - p) / 2.0)


@dataclass(frozen=True)
class ConstantBundle:
    p: float
    c2: float
    c_inf: float
    C_p: float
    branch: str
    sigma_p: float
    sigma_p_sq: float
    b_p1: float
    alpha_p: float

    def to_dict(self):
        return asdict(self)


def constants(p):
    """Every constant attached to the moment order ``p`` in one record."""
    p = _check_p(p)
    s = sigma_p(p)
    return ConstantBundle(
        p=p,
        c2=c2(p),
        c_inf=c_inf(p),
        C_p=C_p(p),
        branch=cp_branch(p),
        sigma_p=s,
        sigma_p_sq=s * s,
        b_p1=b_pd(p, 1),
        alpha_p=alpha_p(p),
    )


def chebyshev_grid(lo, hi, num):
    """``num`` Chebyshev points of the first kind on [lo, hi], ascending."""
    k = np.arange(1, num + 1)
    x = np.cos((2 * k - 1) * np.pi / (2 * num))
    return np.sort(0.5 * (lo + hi) + 0.5 * (hi - lo) * x)


#: Default moment-order grid: 50 Chebyshev points on [0.01, 0.99].
DEFAULT_P_GRID = tuple(float(p) for p in chebyshev_grid(0.01, 0.99, 50))
