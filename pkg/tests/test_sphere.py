import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import kstest

from khinlab import sphere as sp
from khinlab.errors import DomainError
from khinlab.polydensity import exact_neg_moment, two_point_moment
from khinlab.specfun import C_p, c2


def test_samples_are_unit_vectors():
    x = sp.sample_sphere(sp.SphereSampler(1), 200_000)
    assert x.shape == (200_000, 3)
    assert np.max(np.abs(np.linalg.norm(x, axis=1) - 1)) < 1e-14
    with pytest.raises(DomainError):
        sp.sample_sphere(sp.SphereSampler(1), 0)


def test_hat_box_law_and_symmetry():
    n = 200_000
    x = sp.sample_sphere(sp.SphereSampler(2), n)
    for j in range(3):
        assert abs(x[:, j].mean()) < 4 / math.sqrt(n)
    stat = kstest(x[:, 0], "uniform", args=(-1, 2)).statistic
    assert stat < 1.63 / math.sqrt(n)


def test_sampler_reproducible():
    a = sp.sample_sphere(sp.SphereSampler(5), 1000)
    b = sp.sample_sphere(sp.SphereSampler(5), 1000)
    assert np.array_equal(a, b)
    s = sp.SphereSampler(5)
    first = sp.sample_sphere(s, 1000)
    second = sp.sample_sphere(s, 1000)
    assert s.counter == 2 and not np.array_equal(first, second)


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("KHINLAB_SEED", "77")
    assert sp.SphereSampler().seed == 77


def test_conditional_moment():
    p = 0.4
    assert sp.conditional_moment(0.0, 2.0, p) == pytest.approx(2.0**-p)
    assert sp.conditional_moment(3.0, 0.5, p) == pytest.approx(sp.conditional_moment(0.5, 3.0, p))
    for x in (1e-9, 0.3, 1.0):
        assert sp.conditional_moment(x, 1.0, p) == pytest.approx((1 - p) * two_point_moment(x, p), rel=1e-12)


def test_rao_blackwell_examples():
    s = sp.SphereSampler(3)
    e = sp.rao_blackwell_moment((0.7,), 0.3, 10, s)
    assert e.mean == pytest.approx(0.7**-0.3, rel=1e-15) and e.stderr == 0
    e = sp.rao_blackwell_moment((1.0, 0.4), 0.6, 1000, s)
    assert e.mean == pytest.approx((1 - 0.6) * two_point_moment(0.4, 0.6), rel=1e-12)
    e = sp.rao_blackwell_moment((2**-0.5, 2**-0.5), 0.5, 1_000_000, s)
    assert e.mean == pytest.approx(0.5 * c2(0.5), rel=1e-12)
    assert e.mean == pytest.approx(1.121196, abs=1e-6)


def test_rao_blackwell_independent_of_threads():
    a = (0.5, 0.5, 0.5, 0.5)
    x = sp.rao_blackwell_moment(a, 0.5, 300_000, sp.SphereSampler(9), threads=1)
    y = sp.rao_blackwell_moment(a, 0.5, 300_000, sp.SphereSampler(9), threads=4)
    assert x == y


def test_rao_blackwell_unbiased_against_exact():
    rng = np.random.default_rng(4)
    a = rng.standard_normal(5)
    a /= np.linalg.norm(a)
    ps = [0.2, 0.5, 0.8]
    for est, p in zip(sp.rao_blackwell_moments(a, ps, 400_000, sp.SphereSampler(10)), ps):
        assert abs(est.mean - (1 - p) * exact_neg_moment(tuple(a), p)) < 4 * est.stderr


def test_konig_identity():
    s = sp.SphereSampler(11)
    assert sp.konig_identity_check((1.0,), 0.5, 100, s).passed
    for p in (0.1, 0.4, 0.7, 0.95):
        assert sp.konig_identity_check((1.0, 1.0), p, 100_000, s).passed
    rng = np.random.default_rng(12)
    a = rng.standard_normal(6)
    assert sp.konig_identity_check(a / np.linalg.norm(a), 0.7, 200_000, s).passed


def test_projection_bound():
    s = sp.SphereSampler(13)
    r = sp.projection_upper_bound_check((0.8,), 0.5, 100, s)
    assert r.passed and r.params["estimate"] == pytest.approx(r.params["bound"])
    r = sp.projection_upper_bound_check((1.0, 1.0), 0.5, 100_000, s)
    assert r.passed and r.params["estimate"] <= 1
    for p in (0.9, 0.99):  # the projection bound is not sharp at the two-point extremizer
        assert 2 ** (p / 2) - (1 - p) * c2(p) > 0


def test_reversal_vector_level():
    rng = np.random.default_rng(14)
    s = sp.SphereSampler(14)
    for n in (1, 3, 7):
        a = rng.standard_normal(n)
        for p in (0.2, 0.8):
            assert sp.reversal_check(a, p, 100_000, s).passed


@pytest.mark.slow
def test_scalar_sphere_inequality_scan():
    rng = np.random.default_rng(15)
    s = sp.SphereSampler(15)
    ps = [0.2, 0.5, 0.8]
    for _ in range(100):
        a = rng.standard_normal(int(rng.integers(1, 9)))
        a /= np.linalg.norm(a)
        for est, p in zip(sp.rao_blackwell_moments(a, ps, 50_000, s), ps):
            assert est.mean <= (1 - p) * C_p(p) + 4 * est.stderr


def test_matrix_coefficients():
    A = sp.MatrixCoefficients((np.eye(3), 2 * np.eye(3)))
    assert A.hs_norms == pytest.approx((math.sqrt(3), 2 * math.sqrt(3)))
    assert A.hs_total == pytest.approx(15)
    with pytest.raises(DomainError):
        sp.MatrixCoefficients((np.zeros((3, 3)),))
    B = sp.MatrixCoefficients(tuple(np.outer([0, 1, 0], v) for v in ([1, 2, 2], [0, 3, 4])))
    assert B.scalar_reduction() == pytest.approx((3.0, 5.0))
    assert A.scalar_reduction() is None


def test_matrix_scalar_reduction_is_exact():
    a = (0.6, 0.8)
    A = sp.MatrixCoefficients(tuple(np.diag([w, 0, 0]) for w in a))
    r = sp.matrix_corollary_check(A, 0.5, 1000)
    assert r.passed and r.params["method"] == "exact-scalar"
    assert r.params["estimate"] == exact_neg_moment(a, 0.5)
    # sharp: the two-point extremizer attains the bound for p above p0
    A = sp.MatrixCoefficients(tuple(np.diag([2**-0.5, 0, 0]) for _ in range(2)))
    r = sp.matrix_corollary_check(A, 0.9, 10)
    assert r.passed and r.worst_margin == pytest.approx(0.0, abs=1e-7)


def test_matrix_identity_case():
    r = sp.matrix_corollary_check([np.eye(3)], 0.5, 10_000, sp.SphereSampler(1))
    assert r.params["estimate"] == pytest.approx(1.0, rel=1e-12)
    assert r.passed and r.params["bound"] == pytest.approx(C_p(0.5) * 3**-0.25)


def test_matrix_random_and_warning():
    rng = np.random.default_rng(16)
    A = sp.MatrixCoefficients.random(4, rng)
    assert sp.matrix_corollary_check(A, 0.4, 400_000, sp.SphereSampler(16)).passed
    with pytest.warns(RuntimeWarning):
        r = sp.matrix_corollary_check(A, 0.8, 20_000, sp.SphereSampler(16))
    assert "warning" in r.params


@given(st.floats(min_value=0.0, max_value=10.0), st.floats(min_value=0.01, max_value=10.0),
       st.floats(min_value=0.01, max_value=0.99))
def test_conditional_moment_bounded_by_projection(r, c, p):
    v = float(sp.conditional_moment(r, c, p))
    assert 0 < v <= c**-p * (1 + 1e-12)
    assert v <= max(r, c) ** -p * (1 + 1e-12)
