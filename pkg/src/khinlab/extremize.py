"""Numerical search for weight vectors maximising ``E|sum a_k U_k|^{-p}``."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError
from .polydensity import WeightVector, exact_neg_moment
from .specfun import C_p, _check_p

DEFAULT_RESTARTS = 20


class Case(str, enum.Enum):
    A = "CaseA"
    B = "CaseB"


def case_partition(a):
    """``CaseA`` iff ``max|a_k| <= ||a|| / sqrt(2)`` (boundary included), else ``CaseB``."""
    w = np.abs(np.asarray(a.a if isinstance(a, WeightVector) else a, dtype=float))
    if not np.any(w):
        raise DomainError("weight vector needs at least one nonzero entry")
    # compare squares to keep the boundary case (1/sqrt2, 1/sqrt2) exact
    return Case.A if 2.0 * float(w.max()) ** 2 <= float(np.sum(w * w)) * (1 + 1e-15) else Case.B


@dataclass(frozen=True)
class ExtremizerResult:
    best_a: WeightVector
    value: float
    ratio_to_Cp: float
    iterations: int
    converged: bool
    max_seen: float

    @property
    def b(self):
        return tuple(x * x for x in self.best_a)


def moment_on_simplex(b, p):
    """Moment at ``a = sqrt(b)`` for nonnegative ``b`` summing to one."""
    b = np.asarray(b, dtype=float)
    return exact_neg_moment(tuple(np.sqrt(b / b.sum())), p)


def equal_weight_moment(n, p):
    return exact_neg_moment((1.0,) * n, p) * n ** (p / 2)


def optimize_weights(n, p, restarts=DEFAULT_RESTARTS, seed=0, fatol=1e-10):
    """Multi-start Nelder-Mead over the simplex of squared weights.

    The simplex is parametrised by ``b = z^2 / |z|^2``.  Starting points
    are the equal-weight vector, the two-point vector and ``restarts``
    Dirichlet draws.  The best point is returned with ``b`` sorted in
    decreasing order, which fixes the permutation.
    """
    if not 2 <= n <= 12:
        raise DomainError(f"n must lie in [2, 12], got {n!r}")
    p = _check_p(p)
    rng = np.random.default_rng(seed)
    cp = C_p(p)
    seen = [0.0]

    def objective(z):
        z2 = z * z
        tot = z2.sum()
        if not tot > 0:
            return 0.0
        v = moment_on_simplex(z2 / tot, p)
        seen[0] = max(seen[0], v)
        return -v

    starts = [np.ones(n), np.r_[1.0, 1.0, np.zeros(n - 2)] + 1e-3]
    starts += [np.sqrt(rng.dirichlet(np.ones(n))) for _ in range(restarts)]
    best = None
    iterations = 0
    converged = True
    for z0 in starts:
        res = minimize(objective, z0, method="Nelder-Mead",
                       options={"fatol": fatol, "xatol": 1e-9, "maxfev": 400 * n})
        iterations += int(res.nit)
        if best is None or res.fun < best.fun:
            best = res
            converged = bool(res.success)
    z2 = best.x ** 2
    b = np.sort(z2 / z2.sum())[::-1]
    a = WeightVector(tuple(np.sqrt(b) / np.linalg.norm(np.sqrt(b))), normalized=True)
    value = exact_neg_moment(a.a, p)
    return ExtremizerResult(best_a=a, value=value, ratio_to_Cp=value / cp, iterations=iterations,
                            converged=converged, max_seen=max(seen[0], value))


def two_point_perturbation(p, delta):
    """Moment at ``a = (1/sqrt(2-delta), 1/sqrt(2+delta))`` rescaled to unit norm."""
    a = np.array([1.0 / math.sqrt(2.0 - delta), 1.0 / math.sqrt(2.0 + delta)])
    return exact_neg_moment(tuple(a / np.linalg.norm(a)), p)


def second_differences(p, ts):
    """Second differences of ``t -> E|U_1 + sqrt(t) U_2|^{-p}`` on an even grid ``ts``."""
    v = np.array([exact_neg_moment((1.0, math.sqrt(t)), p) for t in ts])
    return v[:-2] - 2 * v[1:-1] + v[2:]
