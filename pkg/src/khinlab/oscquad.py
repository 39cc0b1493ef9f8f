"""Quadrature for sinc-product integrals against the weight ``t^{p-1}``.

Two families of integrals are handled:

* ``int_0^inf prod_k sinc(a_k t) t^{p-1} dt``, which gives the negative
  moment ``E|sum a_k U_k|^{-p}`` after multiplying by ``2 b_{p,1}``;
* ``int_0^inf |sinc u|^s u^{p-1} du`` and its rescaled form
  ``Psi_p(s) = s^{p/2} int_0^inf |sinc u|^s u^{p-1} du``.

Panels end at zeros of the fastest oscillating factor.  Endpoint
singularities (``t^{p-1}`` at the origin, ``|t - k pi|^s`` at zeros of
``|sin|^s``) are absorbed into Gauss-Jacobi weights, so every panel rule
only sees a smooth function.

Tails are closed analytically.  For a product of sines the tail expands
into finitely many terms ``int_T^inf e^{i w t} t^{nu-1} dt``, each an
incomplete gamma function.  For ``|sin u|^s``, which is pi-periodic, two
integrations by parts against the periodic primitive leave the leading
term ``m_s T^{1-mu}/(mu-1)`` and a remainder with an explicit bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import AccuracyError, DomainError, PreconditionError
from .specfun import C_p, b_pd, c2, c_inf, sigma_p_power

# |sin|^s zeros are absorbed into the Jacobi weight only up to this power;
# beyond it the integrand is flat at the zeros and the rule is ill-scaled.
_MAX_JACOBI_POWER = 50.0


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and work limits for the panel quadrature.

    ``tail_tol`` bounds the certified remainder of the ``|sinc|^s`` tail.
    ``tail_fraction`` caps the share of a sinc-product integral that may
    come from the analytic tail rather than from panel quadrature.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    panel_rule: int = 24
    tail_tol: float = 1e-12
    max_panels: int = 200_000
    tail_fraction: float = 1e-3
    max_depth: int = 40

    def __post_init__(self):
        if min(self.abs_tol, self.rel_tol, self.tail_tol, self.tail_fraction) <= 0:
            raise ValueError("tolerances must be positive")
        if self.panel_rule < 4 or self.max_panels < 1:
            raise ValueError("panel_rule must be >= 4 and max_panels >= 1")


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class PsiValue:
    s: float
    p: float
    value: float
    tail_bound: float


@dataclass(frozen=True)
class QuadResult:
    value: float
    head: float
    tail: float
    tail_bound: float
    panels: int


@lru_cache(maxsize=256)
def _jacobi(n, alpha, beta):
    if alpha == 0.0 and beta == 0.0:
        return roots_legendre(n)
    return roots_jacobi(n, alpha, beta)


def _sinc(t):
    return np.sinc(np.asarray(t) / np.pi)


def _apply_rule(fun, c, d, left_exp, right_exp, n):
    """``int_c^d (x-c)^left_exp (d-x)^right_exp fun(x) dx`` with an n-point Gauss-Jacobi rule."""
    x, w = _jacobi(n, right_exp, left_exp)
    half = 0.5 * (d - c)
    nodes = c + half * (1.0 + x)
    return half ** (1.0 + left_exp + right_exp) * np.dot(w, fun(nodes))


def _adaptive(smooth, c0, d0, left_exp, right_exp, tol, spec, rel_floor=1e-14):
    """Adaptive bisection for ``int_{c0}^{d0} (x-c0)^le (d0-x)^re smooth(x) dx``.

    Subpanels touching an original endpoint keep its Jacobi exponent; on
    the others the singular factor is smooth and is folded into the
    integrand.
    """
    n = spec.panel_rule
    total = 0.0
    err = 0.0
    stack = [(c0, d0, 0)]
    width0 = d0 - c0
    while stack:
        c, d, depth = stack.pop()
        le = left_exp if c == c0 else 0.0
        re = right_exp if d == d0 else 0.0

        def f(x, c=c, d=d):
            v = smooth(x)
            if c != c0 and left_exp:
                v = v * (x - c0) ** left_exp
            if d != d0 and right_exp:
                v = v * (d0 - x) ** right_exp
            return v

        coarse = _apply_rule(f, c, d, le, re, n)
        fine = _apply_rule(f, c, d, le, re, n + n // 2)
        # second term: a difference at rounding level cannot be refined away
        local = max(tol * (d - c) / width0, rel_floor * abs(fine))
        if abs(fine - coarse) <= local:
            total += fine
            err += abs(fine - coarse)
        elif depth >= spec.max_depth:
            raise AccuracyError(f"panel [{c}, {d}] did not converge", achieved=abs(fine - coarse))
        else:
            m = 0.5 * (c + d)
            stack.append((m, d, depth + 1))
            stack.append((c, m, depth + 1))
    return total, err


# -- sinc products -----------------------------------------------------------


def _clean_weights(a):
    arr = np.abs(np.asarray(list(a), dtype=float))
    arr = arr[arr > 0]
    if arr.size == 0:
        raise DomainError("weight vector needs at least one nonzero entry")
    return np.sort(arr)[::-1]


def _envelope_tail_bound(a, p, T):
    """``int_T^inf prod_k min(1, 1/(a_k t)) t^{p-1} dt`` in closed form."""
    a = np.sort(a)[::-1]
    knots = 1.0 / a  # ascending: factor k starts decaying at 1/a_k
    total = 0.0
    lo = T
    for j in range(len(a) + 1):
        hi = knots[j] if j < len(a) else math.inf
        if hi <= lo:
            continue
        # on (lo, hi) the first j factors decay: integrand = t^{p-1-j} / prod_{k<j} a_k
        coef = 1.0 / float(np.prod(a[:j])) if j else 1.0
        e = p - j
        if e == 0.0:
            raise DomainError("p must not be an integer")
        upper = 0.0 if hi == math.inf else hi**e
        if hi == math.inf and e >= 0:
            return math.inf
        total += coef * (upper - lo**e) / e
        lo = hi
    return total


def _oscillatory_tail(a, p, T):
    """Exact ``int_T^inf prod sin(a_k t)/(a_k t) t^{p-1} dt`` via the exponential expansion."""
    n = len(a)
    nu = mpmath.mpf(p) - n
    Tm = mpmath.mpf(T)
    total = mpmath.mpc(0)
    # pair each sign pattern with its negation; fix the first sign to +1
    for mask in range(1 << (n - 1)):
        signs = [1] + [(-1 if (mask >> k) & 1 else 1) for k in range(n - 1)]
        omega = mpmath.fsum(s * mpmath.mpf(float(x)) for s, x in zip(signs, a))
        if abs(omega) < 1e-12 * a[0]:
            # |e^{iwt} - 1| <= |w| t; the dropped part is below 1e-12 of the envelope
            j = Tm**nu / (-nu)
            jbar = j
        else:
            j = (-1j * omega) ** (-nu) * mpmath.gammainc(nu, -1j * omega * Tm)
            jbar = mpmath.conj(j)
        sign = -1 if signs.count(-1) % 2 else 1
        total += sign * (j + (-1) ** n * jbar)
    total *= mpmath.power(2j, -n)
    return float(mpmath.re(total)) / float(np.prod(a))


def fourier_integral(a, p, spec=DEFAULT_SPEC):
    """``int_0^inf prod_k sinc(a_k t) t^{p-1} dt`` with diagnostics.

    Requires at least two nonzero weights; returns a :class:`QuadResult`.
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"moment order p must lie in (0, 1), got {p!r}")
    a = _clean_weights(a)
    if a.size < 2:
        raise PreconditionError("the Fourier route needs at least two nonzero weights")
    amax = a[0]
    h = math.pi / amax
    # reversal bound E >= |a|^{-p} sets the scale of the answer
    scale = float(np.dot(a, a)) ** (-p / 2) / (2.0 * b_pd(p, 1))
    tol = max(spec.abs_tol, spec.rel_tol * scale) * 0.1

    def product(t):
        out = np.ones_like(t)
        for x in a:
            out = out * _sinc(x * t)
        return out

    k = 16
    while _envelope_tail_bound(a, p, k * h) > spec.tail_fraction * scale:
        k *= 2
        if k > spec.max_panels:
            bound = _envelope_tail_bound(a, p, spec.max_panels * h)
            raise AccuracyError(
                f"tail envelope still {bound:.3g} after {spec.max_panels} panels", achieved=bound
            )
    head, _ = _adaptive(lambda t: product(t), 0.0, h, p - 1.0, 0.0, tol, spec)
    head += _batched_panels(lambda t: product(t) * t ** (p - 1.0), h, 1, k, tol, spec)
    T = k * h
    tail = _oscillatory_tail(a, p, T)
    bound = _envelope_tail_bound(a, p, T)
    return QuadResult(value=head + tail, head=head, tail=tail, tail_bound=bound, panels=k)


def _batched_panels(fun, h, k_lo, k_hi, tol, spec):
    """Sum of Gauss-Legendre panels ``[k h, (k+1) h]`` for ``k_lo <= k < k_hi``."""
    if k_hi <= k_lo:
        return 0.0
    sub = 1
    n = spec.panel_rule
    while True:
        width = h / sub
        starts = k_lo * h + width * np.arange((k_hi - k_lo) * sub)
        vals = []
        for m in (n, n + n // 2):
            x, w = _jacobi(m, 0.0, 0.0)
            nodes = starts[:, None] + 0.5 * width * (1.0 + x)[None, :]
            vals.append(0.5 * width * math.fsum(fun(nodes) @ w))
        if abs(vals[1] - vals[0]) <= tol:
            return vals[1]
        sub *= 2
        if sub * (k_hi - k_lo) > 50 * spec.max_panels:
            raise AccuracyError("oscillatory panels did not converge", achieved=abs(vals[1] - vals[0]))


def raw_fourier_integral(a, p, spec=DEFAULT_SPEC):
    """Value of ``int_0^inf prod_k sinc(a_k t) t^{p-1} dt``."""
    return fourier_integral(a, p, spec).value


def fourier_neg_moment(a, p, spec=DEFAULT_SPEC):
    """``E|sum a_k U_k|^{-p} = 2 b_{p,1} int_0^inf prod sinc(a_k t) t^{p-1} dt``.

    A single weight is routed to the closed form ``1/((1-p)|a_1|^p)`` because
    its integrand decays too slowly for the panel scheme.
    """
    w = _clean_weights(a)
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"moment order p must lie in (0, 1), got {p!r}")
    if w.size == 1:
        return 1.0 / ((1.0 - p) * w[0] ** p)
    return 2.0 * b_pd(p, 1) * fourier_integral(w, p, spec).value


# -- powers of |sinc| -----------------------------------------------------------


def _q(v):
    """``sin v / (v (pi - v))`` on [0, pi], written to stay accurate at both ends."""
    return (_sinc(v) + _sinc(np.pi - v)) / np.pi


def _sin_power_mean(s):
    """``(1/pi) int_0^pi sin^s``."""
    return math.exp(math.lgamma((s + 1) / 2) - math.lgamma(s / 2 + 1)) / math.sqrt(math.pi)


def _sinc_power_tail(s, p, T):
    """Leading tail term and remainder bound for ``int_T^inf |sin u|^s u^{p-1-s} du`` (T in pi Z).

    With ``mu = s + 1 - p``, integrating by parts twice against the
    primitive of ``|sin|^s - m_s`` (whose own mean vanishes by symmetry)
    leaves ``m_s T^{1-mu}/(mu-1)`` plus a remainder at most
    ``(pi^2/4) mu T^{-mu-1}``.
    """
    mu = s + 1.0 - p
    lead = _sin_power_mean(s) * T ** (1.0 - mu) / (mu - 1.0)
    bound = (math.pi**2 / 4.0) * mu * T ** (-mu - 1.0)
    return lead, bound


def sinc_power_integral_detail(s, p, spec=DEFAULT_SPEC):
    """``int_0^inf |sinc u|^s u^{p-1} du`` for ``s >= 1``; returns ``(value, tail_bound)``."""
    s = float(s)
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"moment order p must lie in (0, 1), got {p!r}")
    if s < 1.0:
        raise DomainError(f"need s >= 1 for an integrable |sinc|^s u^(p-1), got {s!r}")
    gauss = (s / 6.0) ** (-p / 2.0) * math.gamma(p / 2.0) / 2.0  # scale of the answer
    tol = max(spec.abs_tol, spec.rel_tol * gauss) * 0.1

    k = 1
    while _sinc_power_tail(s, p, k * math.pi)[1] > spec.tail_tol:
        k *= 2
    if k > spec.max_panels:
        raise AccuracyError(
            f"tail remainder needs {k} panels (> {spec.max_panels})",
            achieved=_sinc_power_tail(s, p, spec.max_panels * math.pi)[1],
        )
    # shrink k back toward the smallest panel count meeting tail_tol
    lo, hi = max(1, k // 2), k
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _sinc_power_tail(s, p, mid * math.pi)[1] > spec.tail_tol:
            lo = mid
        else:
            hi = mid
    k = hi if _sinc_power_tail(s, p, lo * math.pi)[1] > spec.tail_tol else lo

    if s <= _MAX_JACOBI_POWER:
        head, _ = _adaptive(lambda u: _q(u) ** s, 0.0, math.pi, p - 1.0, s, tol, spec)
    else:
        # rounding in sinc is amplified s times by the power
        head, _ = _adaptive(lambda u: _sinc(u) ** s, 0.0, math.pi, p - 1.0, 0.0, tol, spec, 1e-15 * s)
    if k > 1:
        head += _interior_sinc_power(s, p, k, tol, spec)
    lead, bound = _sinc_power_tail(s, p, k * math.pi)
    return head + lead, bound


def _interior_sinc_power(s, p, k, tol, spec):
    """``sum_{j=1}^{k-1} int_{j pi}^{(j+1) pi} |sin u|^s u^{p-1-s} du``, vectorised over j."""
    j = np.arange(1, k, dtype=float)[:, None]
    n = spec.panel_rule
    vals = []
    for m in (n, n + n // 2):
        if s <= _MAX_JACOBI_POWER:
            x, w = _jacobi(m, s, s)
            v = 0.5 * np.pi * (1.0 + x)
            g = _q(v) ** s * (j * np.pi + v) ** (p - 1.0 - s)
            vals.append((0.5 * np.pi) ** (1.0 + 2.0 * s) * math.fsum(g @ w))
        else:
            x, w = _jacobi(m, 0.0, 0.0)
            v = 0.5 * np.pi * (1.0 + x)
            g = np.abs(np.sin(v)) ** s * (j * np.pi + v) ** (p - 1.0 - s)
            vals.append(0.5 * np.pi * math.fsum(g @ w))
    if abs(vals[1] - vals[0]) > tol:
        raise AccuracyError("interior |sinc|^s panels did not converge", achieved=abs(vals[1] - vals[0]))
    return vals[1]


def sinc_power_integral(s, p, spec=DEFAULT_SPEC):
    """``int_0^inf |sin u / u|^s u^{p-1} du`` (equals ``s^{-p/2} Psi_p(s)``)."""
    return sinc_power_integral_detail(s, p, spec)[0]


def psi(s, p, spec=DEFAULT_SPEC):
    """``Psi_p(s) = int_0^inf |sinc(t/sqrt(s))|^s t^{p-1} dt`` for ``s >= 2``."""
    s = float(s)
    if s < 2.0:
        raise DomainError(f"Psi_p(s) is defined here for s >= 2, got {s!r}")
    scale = s ** (float(p) / 2.0)
    inner = replace(spec, tail_tol=spec.tail_tol / scale, abs_tol=spec.abs_tol / scale)
    value, bound = sinc_power_integral_detail(s, p, inner)
    return PsiValue(s=s, p=float(p), value=scale * value, tail_bound=scale * bound)


def psi_limit(p):
    """``lim_{s -> inf} Psi_p(s) = c_inf(p) / (2 b_{p,1})``."""
    return c_inf(p) / (2.0 * b_pd(p, 1))


def psi_at_two(p):
    """``Psi_p(2) = c2(p) / (2 b_{p,1})`` in closed form."""
    return c2(p) / (2.0 * b_pd(p, 1))


def psi_gaussian(s, p, sigma=None):
    """``int_0^inf exp(-s sigma^2 t^2) t^{p-1} dt = s^{-p/2} sigma^{-p} Gamma(p/2)/2``.

    ``sigma`` defaults to ``sigma_p``, which makes the integral agree with
    ``int |sinc u|^2 u^{p-1} du`` at ``s = 2``.
    """
    s = float(s)
    p = float(p)
    if s <= 0:
        raise DomainError(f"need s > 0, got {s!r}")
    sig_p = sigma_p_power(p) if sigma is None else float(sigma) ** p
    return s ** (-p / 2.0) / sig_p * math.gamma(p / 2.0) / 2.0


def ball_integral_rhs(p):
    """``2^{p-1} sqrt(pi) Gamma(p/2) / Gamma((1-p)/2) * C_p``, the bound on ``Psi_p(s)``."""
    p = float(p)
    return 2.0 ** (p - 1.0) * math.sqrt(math.pi) * math.gamma(p / 2.0) / math.gamma((1.0 - p) / 2.0) * C_p(p)


def ball_integral_margin(s, p, spec=DEFAULT_SPEC):
    """Relative slack ``1 - Psi_p(s) / rhs`` in the weighted Ball integral inequality."""
    return 1.0 - psi(s, p, spec).value / ball_integral_rhs(p)


def sinc_power_kernel(s, t):
    """``K_s(t) = |sinc(t / sqrt(s))|^s``."""
    s = float(s)
    return np.abs(_sinc(np.asarray(t, dtype=float) / math.sqrt(s))) ** s


def holder_bound(a, p, spec=DEFAULT_SPEC):
    """``prod_k Psi_p(1/a_k^2)^{a_k^2}`` for a unit vector with every ``a_k^2 <= 1/2``.

    Dominates ``int_0^inf prod sinc(a_k t) t^{p-1} dt`` by Hoelder's inequality.
    """
    a = np.abs(np.asarray(list(a), dtype=float))
    if np.any(a == 0):
        raise PreconditionError("all weights must be nonzero")
    if abs(float(np.dot(a, a)) - 1.0) > 1e-12:
        raise PreconditionError("weights must have unit norm")
    if np.max(a) ** 2 > 0.5 + 1e-15:
        raise PreconditionError("a weight exceeds 1/sqrt(2): not in the small-weights case")
    cache = {}
    log_total = 0.0
    for x in a:
        s = max(2.0, 1.0 / (x * x))
        if s not in cache:
            cache[s] = psi(s, p, spec).value
        log_total += x * x * math.log(cache[s])
    return math.exp(log_total)
