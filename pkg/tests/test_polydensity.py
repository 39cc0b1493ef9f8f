import json
import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from khinlab import polydensity as pd
from khinlab.errors import CapabilityError, DomainError
from khinlab.specfun import C_p, c2

E111_HALF = 1.6784609690826527416  # E|U1+U2+U3|^{-1/2}, mpmath quadrature of the density


def irwin_hall_center(n):
    """Density at 0 of a sum of n uniforms on [-1, 1] from the Irwin-Hall formula."""
    half = Fraction(n, 2)
    s = sum((-1) ** k * math.comb(n, k) * (half - k) ** (n - 1) for k in range(n // 2 + 1) if half - k > 0)
    return s / math.factorial(n - 1) / 2


unit_vectors = st.lists(st.floats(min_value=-1, max_value=1), min_size=1, max_size=7).filter(
    lambda v: np.linalg.norm(v) > 1e-3
).map(lambda v: tuple(np.asarray(v) / np.linalg.norm(v)))


def test_weight_vector():
    w = pd.WeightVector.unit([3.0, 4.0])
    assert w.normalized and w.norm == pytest.approx(1.0)
    assert len(w) == 2 and w[0] == pytest.approx(0.6)
    with pytest.raises(DomainError):
        pd.WeightVector((0.0, 0.0))
    with pytest.raises(DomainError):
        pd.WeightVector((1.0, 1.0), normalized=True)
    r = pd.WeightVector.random(5, np.random.default_rng(0))
    assert r.norm == pytest.approx(1.0)


def test_uniform_density():
    d = pd.build_density((1.0,))
    assert d(0.0) == 0.5 and d(0.99) == 0.5 and d(1.5) == 0.0
    assert pd.density_at(d, 0.0) == 0.5


def test_triangular_density():
    d = pd.build_density((1.0, 1.0))
    for x in np.linspace(-2, 2, 41):
        assert d(x) == pytest.approx((2 - abs(x)) / 4, abs=1e-15)
    assert d.f0 == Fraction(1, 2)


def test_three_uniforms():
    d = pd.build_density((1.0, 1.0, 1.0))
    assert d.f0 == Fraction(3, 8)
    for x in np.linspace(-3, 3, 61):
        ax = abs(x)
        expected = (3 - x * x) / 8 if ax <= 1 else (3 - ax) ** 2 / 16
        assert d(x) == pytest.approx(expected, abs=1e-15)


def test_scaled_triangle_center():
    d = pd.build_density((2**-0.5, 2**-0.5))
    assert d(0.0) == pytest.approx(math.sqrt(2) / 2, rel=1e-15)


def test_outside_support_is_zero():
    a = (0.3, 0.5, 0.1)
    d = pd.build_density(a)
    assert d(sum(a) + 1e-9) == 0.0 and d(-sum(a) - 1e-3) == 0.0


def test_total_mass_and_evenness():
    rng = np.random.default_rng(1)
    for _ in range(5):
        a = tuple(rng.uniform(0.1, 1, int(rng.integers(1, 7))))
        d = pd.build_density(a)
        assert d.total_mass() == 1
        for x in rng.uniform(-sum(a), sum(a), 20):
            assert d.value_exact(x) == d.value_exact(-x)


@pytest.mark.parametrize("n", [5, 12, 20])
def test_equal_weights_center_matches_irwin_hall(n):
    f0 = pd.build_density((1.0,) * n).f0
    assert f0 == irwin_hall_center(n)
    assert float(f0) == pytest.approx(float(irwin_hall_center(n)), rel=1e-11)


def test_zero_weights_dropped_and_cap():
    assert pd.build_density((1.0, 0.0, 1.0)).n == 2
    with pytest.raises(CapabilityError):
        pd.build_density((1.0,) * 21)


def test_json_export():
    d = pd.build_density((1.0, 0.5))
    doc = json.loads(d.to_json())
    assert [Fraction(b) for b in doc["breakpoints"]] == [Fraction(-3, 2), Fraction(-1, 2), Fraction(1, 2), Fraction(3, 2)]
    assert len(doc["pieces"]) == 3
    assert Fraction(doc["pieces"][1][0]) == Fraction(1, 2)


def test_slice_volume_examples():
    assert pd.slice_volume((1.0, 0.0, 0.0)) == pytest.approx(4.0, rel=1e-15)
    for n in range(2, 11):
        a = (2**-0.5, 2**-0.5) + (0.0,) * (n - 2)
        assert pd.slice_volume(a) == pytest.approx(2 ** (n - 1) * math.sqrt(2), rel=1e-12)


def test_slice_volume_warns_for_non_unit():
    with pytest.warns(UserWarning):
        v = pd.slice_volume((1.0, 1.0))
    assert v == pytest.approx(2 * math.sqrt(2))


def _strip_oracle(a):
    """2^n f(0) for n = 3 from a 1-d integral of the exact strip length in x2."""
    a1, a2, a3 = a

    def length(x1):
        lo = max(-1.0, (-a3 - a1 * x1) / a2)
        hi = min(1.0, (a3 - a1 * x1) / a2)
        return max(0.0, hi - lo)

    f0 = quad(length, -1, 1, points=[-(a3 + a2) / a1, (a2 - a3) / a1, (a3 - a2) / a1, (a3 + a2) / a1], epsabs=1e-14)[0]
    return 8 * f0 / (8 * a3)


def test_slice_volume_against_geometric_oracles():
    a = (3**-0.5,) * 3
    exact = pd.slice_volume(a)
    assert exact == pytest.approx(3 * math.sqrt(3), rel=1e-12)
    assert exact == pytest.approx(_strip_oracle(a), rel=1e-10)
    # hit-or-miss: fraction of the cube inside a thin slab around the hyperplane
    rng = np.random.default_rng(7)
    eps, n_pts = 0.02, 4_000_000
    x = rng.uniform(-1, 1, (n_pts, 3))
    frac = np.mean(np.abs(x @ np.array(a)) < eps)
    estimate = 8 * frac / (2 * eps)
    assert estimate == pytest.approx(exact, rel=5e-3)


def test_neg_moment_examples():
    for p in (0.1, 0.5, 0.9):
        assert pd.exact_neg_moment((1.0,), p) == pytest.approx(1 / (1 - p), rel=1e-14)
        assert pd.exact_neg_moment((2**-0.5, 2**-0.5), p) == pytest.approx(c2(p), rel=1e-12)
    assert pd.exact_neg_moment((1.0, 1.0, 1.0), 0.5) == pytest.approx(E111_HALF, rel=1e-13)


def test_two_point_moment():
    assert pd.two_point_moment(1.0, 0.5) == pytest.approx(2**1.5 / 1.5, rel=1e-15)
    assert pd.two_point_moment(1.0, 0.5) == pytest.approx(c2(0.5) / 2**0.25, rel=1e-14)
    assert pd.two_point_moment(1e-12, 0.3) == pytest.approx(1 / 0.7, rel=1e-10)
    assert pd.two_point_moment(0.5, 0.5) == pytest.approx(pd.exact_neg_moment((1.0, 0.5), 0.5), rel=1e-12)
    for x in (0.0, -0.1, 1.1):
        with pytest.raises(DomainError):
            pd.two_point_moment(x, 0.5)


@pytest.mark.parametrize("x", [0.05, 0.3, 0.77, 1.0])
@pytest.mark.parametrize("p", [0.2, 0.6, 0.95])
def test_two_point_matches_exact(x, p):
    assert pd.exact_neg_moment((1.0, x), p) == pytest.approx(pd.two_point_moment(x, p), rel=1e-12)


def test_moment_limit_identity():
    rng = np.random.default_rng(3)
    for n in (2, 4, 6):
        a = rng.standard_normal(n)
        a = tuple(a / np.linalg.norm(a))
        target = 2.0 ** (1 - n) * pd.slice_volume(a)
        for k in range(3, 7):
            p = 1 - 10.0**-k
            assert abs((1 - p) * pd.exact_neg_moment(a, p) - target) < 10.0 ** (-k + 1)


@given(unit_vectors, st.floats(min_value=0.01, max_value=0.99))
def test_reversal_and_main_bound(a, p):
    v = pd.exact_neg_moment(a, p)
    assert v >= 1 - 1e-12
    assert v <= C_p(p) * (1 + 1e-9)


@given(unit_vectors, st.floats(min_value=0.05, max_value=0.95), st.floats(min_value=0.1, max_value=10))
def test_homogeneity(a, p, t):
    scaled = tuple(t * x for x in a)
    assert pd.exact_neg_moment(scaled, p) == pytest.approx(t**-p * pd.exact_neg_moment(a, p), rel=1e-11)


@given(unit_vectors)
def test_sign_and_order_invariance(a):
    b = tuple(-x for x in reversed(a))
    assert pd.exact_neg_moment(a, 0.4) == pytest.approx(pd.exact_neg_moment(b, 0.4), rel=1e-14)


def test_heavy_cancellation_stays_accurate():
    a = tuple(1.0 + 1e-3 * k for k in range(16))
    v = pd.exact_neg_moment(a, 0.5)
    # nearly equal weights: a slight perturbation of the equal-weight value
    eq = pd.exact_neg_moment((np.mean(a),) * 16, 0.5)
    assert v == pytest.approx(eq, rel=1e-4)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert math.isfinite(v)


def test_neg_moment_domain():
    with pytest.raises(DomainError):
        pd.exact_neg_moment((1.0, 1.0), 1.0)
