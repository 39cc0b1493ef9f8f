"""Distribution-function comparison for ``|sinc|`` against Gaussians, plus the
elementary inequalities used alongside it.

Layer-cake quantities are taken with respect to ``d mu(t) = t^{p-1} dt`` on
(0, inf).  For ``f(t) = |sin t / t|`` the level set ``{f > y}`` is a union of
intervals: ``(0, t_0)`` and one interval ``(t_k^-, t_k^+)`` inside every
``(k pi, (k+1) pi)`` whose local maximum ``y_k`` exceeds ``y``.  All
endpoints are found by vectorised bisection, which makes ``F(y)`` cheap
even for small ``y`` where thousands of humps contribute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, KhinlabError, PreconditionError
from .oscquad import psi_gaussian, sinc_power_integral
from .polydensity import exact_neg_moment
from .specfun import C_p

_BISECT_STEPS = 60


# -- successive maxima -------------------------------------------------------


@dataclass(frozen=True)
class MaximaSequence:
    """Local maxima ``y_m`` of ``|sinc|`` on ``(m pi, (m+1) pi)`` and their locations."""

    y: np.ndarray
    t_star: np.ndarray

    def __len__(self):
        return len(self.y)


def _maxima_locations(m):
    """Solve ``tan t = t`` on ``(m pi, (m+1) pi)`` by Newton's method, vectorised over m."""
    m = np.asarray(m, dtype=float)
    c = (m + 0.5) * np.pi
    t = c - 1.0 / c
    for _ in range(50):
        # g(t) = sin t - t cos t vanishes where tan t = t; g'(t) = t sin t
        step = (np.sin(t) - t * np.cos(t)) / (t * np.sin(t))
        t = t - step
        if np.all(np.abs(step) <= 4e-16 * t):
            break
    else:
        raise KhinlabError("Newton iteration for the maxima of sinc did not converge")
    return t


def successive_maxima(m_max):
    """First ``m_max`` successive maxima of ``|sin t / t|`` beyond the main lobe."""
    if m_max < 1:
        raise DomainError("m_max must be at least 1")
    t = _maxima_locations(np.arange(1, m_max + 1))
    return MaximaSequence(y=np.abs(np.sin(t)) / t, t_star=t)


class _MaximaCache:
    def __init__(self):
        self.seq = successive_maxima(64)

    def upto(self, y):
        """Maxima sequence long enough to contain every ``y_m > y``."""
        need = int(1.0 / (math.pi * y)) + 2  # y_m < 1/(m pi)
        if need > len(self.seq):
            self.seq = successive_maxima(max(need, 2 * len(self.seq)))
        return self.seq


_MAXIMA = _MaximaCache()


def y1():
    """Largest secondary maximum of ``|sinc|``, about 0.217234."""
    return float(_MAXIMA.seq.y[0])


def hump_count(y):
    """Number ``m(y)`` of secondary humps of ``|sinc|`` rising above ``y``."""
    seq = _MAXIMA.upto(y)
    return int(np.count_nonzero(seq.y > y))


# -- level sets -----------------------------------------------------------------


def _bisect(lo, hi, increasing, y, fun):
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        above = fun(mid) > y
        go_left = above if increasing else ~above
        hi = np.where(go_left, mid, hi)
        lo = np.where(go_left, lo, mid)
    return 0.5 * (lo + hi)


def _abs_sinc(t):
    return np.abs(np.sinc(t / np.pi))


def t0(y):
    """Unique solution of ``sin t / t = y`` on ``(0, pi)`` for ``0 < y < 1``."""
    y = float(y)
    if not 0.0 < y < 1.0:
        raise DomainError(f"y must lie in (0, 1), got {y!r}")
    return float(_bisect(0.0, math.pi, False, y, _abs_sinc))


def level_roots(y):
    """All ``t > 0`` with ``|sinc t| = y``: ``(t0, t_minus, t_plus)`` arrays over the humps."""
    y = float(y)
    if not 0.0 < y < 1.0:
        raise DomainError(f"y must lie in (0, 1), got {y!r}")
    seq = _MAXIMA.upto(y)
    m = int(np.count_nonzero(seq.y > y))
    k = np.arange(1, m + 1, dtype=float)
    ts = seq.t_star[:m]
    tm = _bisect(k * np.pi, ts, True, y, _abs_sinc)
    tp = _bisect(ts, (k + 1) * np.pi, False, y, _abs_sinc)
    return t0(y), tm, tp


def dist_F(y, p):
    """``F(y) = mu{t > 0 : |sinc t| > y}`` with ``d mu = t^{p-1} dt``; zero for y >= 1."""
    y = float(y)
    p = float(p)
    if y >= 1.0:
        return 0.0
    if y <= 0.0:
        raise DomainError("F is infinite for y <= 0")
    a, tm, tp = level_roots(y)
    return math.fsum([a**p, *(tp**p), *(-(tm**p))]) / p


def dist_F_derivative(y, p):
    """``|F'(y)| = sum over level points t of t^{p-1} / |f'(t)|`` (exact root formula)."""
    a, tm, tp = level_roots(y)
    t = np.concatenate([[a], tm, tp])
    fprime = np.abs(t * np.cos(t) - np.sin(t)) / t**2
    return math.fsum(t ** (p - 1.0) / fprime)


def dist_F_derivative_numeric(y, p, rel_step=1e-6):
    """``|F'(y)|`` by central differences with one Richardson extrapolation step."""
    h = rel_step * y

    def central(step):
        return (dist_F(y - step, p) - dist_F(y + step, p)) / (2.0 * step)

    return (4.0 * central(h / 2.0) - central(h)) / 3.0


def dist_G(y, p, sigma):
    """Distribution function of ``exp(-sigma^2 t^2)``: ``(-log y)^{p/2} / (p sigma^p)``."""
    y = float(y)
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    if y >= 1.0:
        return 0.0
    if y <= 0.0:
        raise DomainError("G is infinite for y <= 0")
    return (-math.log(y)) ** (p / 2.0) / (p * sigma**p)


def dist_G_derivative(y, p, sigma):
    """``|G'(y)| = 1 / (2 sigma^p y (-log y)^{1-p/2})``."""
    return 1.0 / (2.0 * sigma**p * y * (-math.log(y)) ** (1.0 - p / 2.0))


# -- sign changes of F - G --------------------------------------------------------


@dataclass
class SignChangeResult:
    """Outcome of the sign-change scan of ``F - G`` on (lo, hi).

    ``crossings`` holds brackets ``(a, b)`` with ``F - G`` of opposite
    strict signs at the ends.  When some grid point could not be assigned
    a sign the result is ``indeterminate`` and ``count`` is only a lower
    bound.
    """

    count: int
    crossings: list = field(default_factory=list)
    indeterminate: bool = False
    grid: int = 0
    interval: tuple = (0.0, 1.0)

    @property
    def status(self):
        return "indeterminate" if self.indeterminate else "certified"


def _signed_gap(y, p, sigma):
    F = dist_F(y, p)
    G = dist_G(y, p, sigma)
    err = 1e-11 * (F + G) + 1e-300
    d = F - G
    return 0 if abs(d) <= err else (1 if d > 0 else -1)


def count_sign_changes(p, sigma, grid=1000, lo=1e-4, hi=1.0 - 1e-4, width=1e-9):
    """Count sign changes of ``F - G`` on ``(lo, hi)``.

    Points are spaced uniformly in ``logit(y)``, which resolves both ends.
    A sign change between neighbouring grid points is narrowed by bisection
    to a bracket of length ``width``.  A grid point whose sign cannot be
    decided is re-sampled at nearby points; if that fails, or if it sits
    between two points of equal sign, the verdict is indeterminate.
    """
    if grid < 10:
        raise DomainError("grid must have at least 10 points")
    z = np.linspace(math.log(lo / (1 - lo)), math.log(hi / (1 - hi)), grid)
    ys = 1.0 / (1.0 + np.exp(-z))
    signs = [_signed_gap(y, p, sigma) for y in ys]

    indeterminate = False
    for i, sg in enumerate(signs):
        if sg:
            continue
        left = ys[i - 1] if i else lo
        right = ys[i + 1] if i + 1 < len(ys) else hi
        probes = [_signed_gap(y, p, sigma) for y in np.linspace(left, right, 9)[1:-1]]
        nonzero = [q for q in probes if q]
        # an undecided point is harmless only when it sits on a clean crossing
        if not nonzero or (len(set(nonzero)) == 1 and signs[i - 1 : i] == signs[i + 1 : i + 2]):
            indeterminate = True

    decided = [(y, sg) for y, sg in zip(ys, signs) if sg]
    crossings = []
    for (ya, sa), (yb, sb) in zip(decided[:-1], decided[1:]):
        if sa == sb:
            continue
        a, b = ya, yb
        while b - a > width:
            mid = 0.5 * (a + b)
            sm = _signed_gap(mid, p, sigma)
            if sm == 0:
                break
            if sm == sa:
                a = mid
            else:
                b = mid
        crossings.append((a, b))
    return SignChangeResult(
        count=len(crossings), crossings=crossings, indeterminate=indeterminate, grid=grid, interval=(lo, hi)
    )


# -- derivative ratio and the convexity lemma -------------------------------------


@dataclass(frozen=True)
class RatioCheck:
    y: float
    m: int
    ratio: float
    ratio_exact: float
    bound: float
    fprime_lower: float

    @property
    def ok(self):
        return self.ratio >= self.bound and self.ratio_exact >= self.bound


def ratio_bound(m, p, sigma):
    """Lower bound for ``|F'|/|G'|`` on ``(y_{m+1}, y_m)`` valid for every p in (0, 1)."""
    L = math.log(math.pi * (m + 1.5))
    tail = 2.0**p + 2.0 * math.pi**p * math.fsum(k**p for k in range(1, m + 1))
    return 5.0 / 3.0 * sigma**p * L ** (1.0 - p / 2.0) / (math.pi * (m + 1.5)) * tail


def ratio_F_over_G(y, p, sigma):
    """Compare ``|F'(y)|/|G'(y)|`` with its analytic lower bound for ``y < y_1``."""
    y = float(y)
    if not 0.0 < y < y1():
        raise PreconditionError(f"y must lie below y_1 = {y1():.6f}, got {y!r}")
    m = hump_count(y)
    g = dist_G_derivative(y, p, sigma)
    numeric = dist_F_derivative_numeric(y, p) / g
    exact = dist_F_derivative(y, p) / g
    lower = 5.0 / 6.0 * (2.0**p + 2.0 * math.pi**p * math.fsum(k**p for k in range(1, m + 1)))
    return RatioCheck(y=y, m=m, ratio=numeric, ratio_exact=exact, bound=ratio_bound(m, p, sigma), fprime_lower=lower)


def _log_level(m):
    return math.log(math.pi * (m + 1.5))


def A_m(m):
    return 5.0 / 3.0 * math.sqrt(2.0 / math.pi) * _log_level(m) / (math.pi * (m + 1.5))


def a_km(k, m):
    """``a_{0,m} = L^{-1/2}`` and ``a_{k,m} = (pi k / 2) L^{-1/2}`` with ``L = log(pi (m + 3/2))``."""
    base = _log_level(m) ** -0.5
    return base if k == 0 else 0.5 * math.pi * k * base


def R_m(m, p):
    """``A_m (a_{0,m}^p + 2 sum_k a_{k,m}^p)``; p may be taken in [0, 1]."""
    if m < 1:
        raise DomainError("m must be a positive integer")
    p = float(p)
    return A_m(m) * (a_km(0, m) ** p + 2.0 * math.fsum(a_km(k, m) ** p for k in range(1, m + 1)))


def R_m_direct(m, p):
    """The same quantity as ``R_m`` written with ``sigma_p^p`` replaced by its lower bound."""
    return ratio_bound(m, p, 1.0) * math.pi**-0.5 * 2.0 ** (0.5 - p)


def b_m(m):
    """``(pi/2)^{2m} (m!)^2 L^{-1/2-m}``, the product ``a_{0,m} prod_k a_{k,m}^2``."""
    L = _log_level(m)
    return math.exp(2 * m * math.log(math.pi / 2) + 2 * math.lgamma(m + 1) - (0.5 + m) * math.log(L))


def R1_slope_at_one():
    """``R_1'(1) = A_1 (a_{0,1} log a_{0,1} + 2 a_{1,1} log a_{1,1})``."""
    a0, a1 = a_km(0, 1), a_km(1, 1)
    return A_m(1) * (a0 * math.log(a0) + 2 * a1 * math.log(a1))


# -- elementary lemmas ---------------------------------------------------------


def cos_minus_sinc(t):
    t = np.asarray(t, dtype=float)
    return np.cos(t) - np.sinc(t / np.pi)


def sup_cos_minus_sinc(t_max=50.0, grid=200_001):
    """Global supremum of ``|cos t - sin t / t|`` over t > 0.

    A dense grid on ``(0, t_max]`` is polished by a bounded scalar search.
    Beyond ``t_max`` Cauchy-Schwarz gives ``sqrt(1 + 1/t^2)``, which is
    checked to lie below the value found.
    """
    t = np.linspace(1e-6, t_max, grid)
    v = np.abs(cos_minus_sinc(t))
    i = int(np.argmax(v))
    step = t[1] - t[0]
    res = minimize_scalar(
        lambda x: -abs(float(cos_minus_sinc(x))),
        bounds=(max(t[i] - step, 1e-9), t[i] + step),
        method="bounded",
        options={"xatol": 1e-13},
    )
    best = max(-res.fun, v[i])
    if math.sqrt(1.0 + 1.0 / t_max**2) >= best:
        raise KhinlabError("grid range too short to certify the supremum")
    return float(best)


def h_eval(p, x):
    """``((1+x)/2)^{2-p} - ((1-x)/2)^{2-p} + x ((3-x^2)/2)^{-p/2}`` on [0, 2] x [0, 1]."""
    p = float(p)
    x = float(x)
    if not (0.0 <= p <= 2.0 and 0.0 <= x <= 1.0):
        raise DomainError(f"need p in [0, 2] and x in [0, 1], got p={p!r}, x={x!r}")
    return ((1 + x) / 2) ** (2 - p) - ((1 - x) / 2) ** (2 - p) + x * ((3 - x * x) / 2) ** (-p / 2)


def phi_base(p, x):
    """``phi_p(x) = (1 + x)^{-p/2}``."""
    x = float(x)
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x!r}")
    return (1.0 + x) ** (-float(p) / 2.0)


def phi(p, x):
    """Modified profile ``Phi_p``: ``phi_p`` on [1, inf), its point reflection about x = 1 on [0, 1]."""
    x = float(x)
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x!r}")
    if x >= 1.0:
        return phi_base(p, x)
    return 2.0 * phi_base(p, 1.0) - phi_base(p, 2.0 - x)


def phi_midpoint_check(p, a, b, slack=1e-12):
    """Midpoint concavity ``(Phi(a) + Phi(b))/2 <= Phi((a+b)/2)`` when ``(a+b)/2 <= 1``."""
    a = float(a)
    b = float(b)
    if a < 0 or b < 0 or (a + b) / 2 > 1.0:
        raise PreconditionError("need a, b >= 0 with (a + b)/2 <= 1")
    return (phi(p, a) + phi(p, b)) / 2.0 <= phi(p, (a + b) / 2.0) + slack


def strengthened_margin(a_tail, p):
    """Relative slack ``1 - E|U_1 + sum a_k U_k|^{-p} / (C_p Phi_p(sum a_k^2))``."""
    tail = [float(x) for x in a_tail]
    x = math.fsum(v * v for v in tail)
    lhs = exact_neg_moment(tuple([1.0, *tail]), p)
    return 1.0 - lhs / (C_p(p) * phi(p, x))


def strengthened_bound_check(a_tail, p, rel_tol=1e-9):
    """``E|U_1 + sum a_k U_k|^{-p} <= C_p Phi_p(sum a_k^2) (1 + rel_tol)``."""
    return strengthened_margin(a_tail, p) >= -rel_tol


def np_monotonicity_probe(p, sigma, s_list, grid=1000):
    """``(1/(s y0^s)) int (f^s - g^s) d mu`` along ``s_list``.

    ``f = |sinc|``, ``g = exp(-sigma^2 t^2)`` and ``y0`` is the certified
    crossing level of their distribution functions; a single crossing is
    required, otherwise the monotonicity statement does not apply.
    """
    res = count_sign_changes(p, sigma, grid=grid)
    if res.indeterminate or res.count != 1:
        raise PreconditionError(f"need exactly one certified crossing, found {res.count} ({res.status})")
    y0 = 0.5 * sum(res.crossings[0])
    out = []
    for s in s_list:
        diff = sinc_power_integral(s, p) - psi_gaussian(s, p, sigma)
        out.append(diff / (s * y0**s))
    return out


def gaussian_gap_on_first_lobe(p, sigma, num=2000):
    """``min_{t in (0, pi)} (exp(-sigma^2 t^2) - |sinc t|)`` on a grid."""
    t = np.linspace(1e-6, math.pi, num)
    return float(np.min(np.exp(-(sigma**2) * t**2) - _abs_sinc(t)))
