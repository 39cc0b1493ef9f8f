"""Exact piecewise-polynomial density of ``X = sum_k a_k U_k`` with ``U_k ~ U[-1, 1]``.

The density is the box spline

    f(x) = sum_S (-1)^{|S|} (x + s - c_S)_+^{n-1} / ((n-1)! prod_k c_k),

with ``c_k = 2|a_k|``, ``s = sum_k |a_k|`` and ``c_S`` the subset sums of the
``c_k``.  The alternating sum loses roughly n decimal digits in fixed
precision, so weights are converted to exact rationals over a common
denominator and the subset sums are accumulated as Python integers.  Only
the final evaluation is rounded.

Negative moments use the same data.  Integrating ``|x|^{-p}`` against the box
spline n times by parts gives

    E|X|^{-p} = 2 sum_{S: c_S < s} (-1)^{|S|} (s - c_S)^{n-p}
                / (prod_k c_k * prod_{j=1..n} (j - p)),

a finite sum of positive powers which is evaluated in floating point when
cancellation is mild and in multiple precision (gmpy2) otherwise.
"""

from __future__ import annotations

import bisect
import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import gmpy2
import numpy as np

from .errors import CapabilityError, DomainError

#: Largest number of nonzero weights handled by the exact constructions.
MAX_EXACT_TERMS = 20

_UNIT_TOL = 1e-12
# slice_volume rescales exactly; only warn when the input is visibly off the sphere
_WARN_TOL = 1e-6


@dataclass(frozen=True)
class WeightVector:
    """Finite list of real weights.

    Signs are irrelevant to every quantity computed here and zero entries
    are allowed; they are dropped when a density is built.
    """

    a: tuple
    normalized: bool = False

    def __post_init__(self):
        a = tuple(self.a)
        if len(a) == 0 or all(x == 0 for x in a):
            raise DomainError("weight vector needs at least one nonzero entry")
        object.__setattr__(self, "a", a)
        if self.normalized and abs(sum(float(x) ** 2 for x in a) - 1.0) > _UNIT_TOL:
            raise DomainError("weights flagged as normalized do not have unit norm")

    @classmethod
    def unit(cls, a):
        """Rescale ``a`` to unit Euclidean norm."""
        arr = np.asarray(a, dtype=float)
        return cls(tuple(arr / np.linalg.norm(arr)), normalized=True)

    @classmethod
    def random(cls, n, rng):
        """Uniformly random direction on S^{n-1} (normalised Gaussian vector)."""
        return cls.unit(rng.standard_normal(n))

    def __len__(self):
        return len(self.a)

    def __iter__(self):
        return iter(self.a)

    def __getitem__(self, i):
        return self.a[i]

    @property
    def norm(self):
        return math.sqrt(sum(float(x) ** 2 for x in self.a))


def _exact(x):
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"weights must be finite, got {x!r}")
    return Fraction(x)  # exact binary rational


def _integer_scaling(weights):
    """Write ``|a_k| = A_k / Q`` with positive integers ``A_k`` and a common ``Q``."""
    fr = [abs(_exact(x)) for x in weights]
    fr = [x for x in fr if x != 0]
    if not fr:
        raise DomainError("weight vector needs at least one nonzero entry")
    q = 1
    for x in fr:
        q = q * x.denominator // math.gcd(q, x.denominator)
    ints = tuple(sorted((x.numerator * (q // x.denominator) for x in fr), reverse=True))
    return ints, q


def _signed_subset_sums(ints):
    """Map each subset sum of ``ints`` to ``sum (-1)^{|S|}`` over subsets attaining it."""
    acc = {0: 1}
    for a in ints:
        nxt = dict(acc)
        for s, c in acc.items():
            v = nxt.get(s + a, 0) - c
            if v:
                nxt[s + a] = v
            else:
                nxt.pop(s + a, None)
        acc = nxt
    return acc


class PiecewisePolyDensity:
    """Density of ``sum a_k U_k`` as exact rational polynomial pieces.

    Parameters
    ----------
    weights : sequence of real
        Weights ``a_k``; floats are read as the binary rationals they store.
    max_terms : int
        Refuse more than this many nonzero weights.

    Attributes
    ----------
    n : int
        Number of nonzero weights.
    ints, q : tuple of int, int
        ``|a_k| = ints[k] / q``.
    offsets : dict
        ``D -> w``: the box spline is ``sum_D w (x + D/q)_+^{n-1}`` up to
        the normalising factor, with ``D = sum |A_k| - 2 A_S``.
    """

    def __init__(self, weights, max_terms=MAX_EXACT_TERMS):
        ints, q = _integer_scaling(weights)
        if len(ints) > max_terms:
            raise CapabilityError(
                f"{len(ints)} nonzero weights exceed the exact-mode cap of {max_terms}; "
                "use fourier_neg_moment or Monte Carlo estimates instead"
            )
        self.ints = ints
        self.q = q
        self.n = len(ints)
        total = sum(ints)
        self.total = total
        sums = _signed_subset_sums(ints)
        self.offsets = {total - 2 * s: w for s, w in sums.items()}
        self._norm = math.factorial(self.n - 1) * (2 ** self.n) * math.prod(ints)

    @cached_property
    def breakpoints(self):
        """Sorted knots ``-D/q`` of the spline as Fractions; the support is [first, last]."""
        return [Fraction(-d, self.q) for d in sorted(self.offsets, reverse=True)]

    @cached_property
    def pieces(self):
        """Ascending-power coefficients (in x) of the polynomial on each knot interval."""
        n1 = self.n - 1
        binom = [math.comb(n1, j) for j in range(n1 + 1)]
        scale = Fraction(self.q ** self.n, self._norm)
        coeffs = [Fraction(0)] * (n1 + 1)
        out = []
        for d in sorted(self.offsets, reverse=True)[:-1]:
            w = self.offsets[d]
            beta = Fraction(d, self.q)
            powers = [Fraction(1)]
            for _ in range(n1):
                powers.append(powers[-1] * beta)
            coeffs = [c + w * binom[j] * powers[n1 - j] for j, c in enumerate(coeffs)]
            out.append([c * scale for c in coeffs])
        return out

    @property
    def support(self):
        return self.breakpoints[0], self.breakpoints[-1]

    def value_exact(self, x):
        """Density at ``x`` as an exact Fraction."""
        x = _exact(x)
        bps = self.breakpoints
        if x <= bps[0] or x >= bps[-1]:
            return Fraction(0)
        i = bisect.bisect_right(bps, x) - 1
        acc = Fraction(0)
        for c in reversed(self.pieces[i]):
            acc = acc * x + c
        return acc

    def __call__(self, x):
        return float(self.value_exact(x))

    @cached_property
    def f0(self):
        """``f(0)`` exactly; this is also the maximum of the density."""
        num = sum(w * d ** (self.n - 1) for d, w in self.offsets.items() if d > 0)
        return Fraction(num * self.q, self._norm)

    def total_mass(self):
        """Integral of the density, computed exactly from the pieces (always 1)."""
        bps = self.breakpoints
        mass = Fraction(0)
        for (lo, hi), cs in zip(zip(bps[:-1], bps[1:]), self.pieces):
            mass += sum(c * (hi ** (j + 1) - lo ** (j + 1)) / (j + 1) for j, c in enumerate(cs))
        return mass

    def to_json(self):
        """Plot-ready export: knots and per-interval ascending coefficients as rational strings."""
        return json.dumps(
            {
                "breakpoints": [str(b) for b in self.breakpoints],
                "pieces": [[str(c) for c in cs] for cs in self.pieces],
            }
        )

    # negative moments ------------------------------------------------

    @cached_property
    def _moment_terms(self):
        pos = sorted((d, w) for d, w in self.offsets.items() if d > 0)
        dmax = self.total
        ratios = np.array([d / dmax for d, _ in pos])
        weights = np.array([float(w) for _, w in pos])
        return pos, ratios, weights

    def _log_prefactor(self, p):
        n = self.n
        return (
            math.log(2.0)
            + (n - p) * math.log(self.total)
            + p * math.log(self.q)
            - n * math.log(2.0)
            - sum(math.log(a) for a in self.ints)
            - sum(math.log(j - p) for j in range(1, n + 1))
        )

    def neg_moment(self, p):
        """``E|X|^{-p}`` for ``0 < p < 1``, accurate to about 1e-14 relative."""
        p = float(p)
        if not 0.0 < p < 1.0:
            raise DomainError(f"moment order p must lie in (0, 1), got {p!r}")
        return math.exp(self._log_prefactor(p) + self._log_alternating_sum(p))

    def _log_alternating_sum(self, p):
        """Logarithm of the alternating sum; its value can be far below the float range."""
        pos, ratios, weights = self._moment_terms
        e = self.n - p
        terms = weights * np.power(ratios, e)
        s = math.fsum(terms)
        magnitude = math.fsum(np.abs(terms))
        # fsum is exact on the rounded terms; each term carries a few ulp
        if s > 0 and magnitude / s < 256.0:
            return math.log(s)
        prec = 128
        while True:
            with gmpy2.context(gmpy2.get_context(), precision=prec):
                dmax = gmpy2.mpz(self.total)
                ee = gmpy2.mpfr(e)
                acc = gmpy2.mpfr(0)
                mag = gmpy2.mpfr(0)
                for d, w in pos:
                    t = (gmpy2.mpfr(d) / dmax) ** ee
                    acc += w * t
                    mag += abs(w) * t
                if acc > 0:
                    lost = float(gmpy2.log2(mag / acc))
                    if prec - lost >= 80:
                        return float(gmpy2.log(acc))
                    prec = int(lost) + 128
                else:
                    prec *= 2
            if prec > 1 << 16:
                raise CapabilityError("cancellation in the moment sum exceeds 65536 bits")


@lru_cache(maxsize=512)
def _cached_density(key):
    return PiecewisePolyDensity(key)


def _key(a):
    return tuple(a.a if isinstance(a, WeightVector) else a)


def build_density(a, max_terms=MAX_EXACT_TERMS):
    """Exact density of ``sum a_k U_k`` (zero weights dropped)."""
    if max_terms != MAX_EXACT_TERMS:
        return PiecewisePolyDensity(_key(a), max_terms=max_terms)
    return _cached_density(_key(a))


def density_at(d, x):
    """Value of a density at ``x`` (0 outside the support)."""
    return d(x)


def exact_neg_moment(a, p):
    """``E|sum a_k U_k|^{-p}`` from the exact box-spline representation.

    The weights are used as given (no normalisation), so homogeneity
    ``E|t X|^{-p} = |t|^{-p} E|X|^{-p}`` holds exactly.
    """
    return build_density(a).neg_moment(p)


def slice_volume(a):
    """(n-1)-volume of the central section of ``[-1, 1]^n`` orthogonal to ``a``.

    Uses ``Vol = 2^n f(0)`` for the density of ``sum a_k U_k`` with unit ``a``;
    ``n = len(a)`` counts zero entries.  A non-unit ``a`` is rescaled, with a
    ``UserWarning``.
    """
    key = _key(a)
    n = len(key)
    norm = math.sqrt(math.fsum(float(x) ** 2 for x in key))
    if abs(norm * norm - 1.0) > _WARN_TOL:
        warnings.warn(f"weights have norm {norm!r}; normalising to the unit vector", UserWarning, stacklevel=2)
    f0 = build_density(key).f0
    return 2.0 ** n * float(f0) * norm


def two_point_moment(x, p):
    """``E|U_1 + x U_2|^{-p} = ((1+x)^{2-p} - (1-x)^{2-p}) / (2(1-p)(2-p)x)`` for ``0 < x <= 1``."""
    x = float(x)
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"moment order p must lie in (0, 1), got {p!r}")
    if not 0.0 < x <= 1.0:
        raise DomainError(f"x must lie in (0, 1], got {x!r}")
    q = 2.0 - p
    # expm1/log1p keep the difference accurate as x -> 0
    diff = math.expm1(q * math.log1p(x)) - (math.expm1(q * math.log1p(-x)) if x < 1.0 else -1.0)
    return diff / (2.0 * (1.0 - p) * q * x)
