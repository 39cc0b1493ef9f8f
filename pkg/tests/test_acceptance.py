"""Acceptance suite: one test per criterion, each at its stated tolerance.

A summary line per criterion is printed at the end of the pytest run.
"""

import math
import time

import numpy as np
import pytest

from khinlab import extremize, npverify, oscquad, polydensity, specfun, sphere, verify
from khinlab.polydensity import exact_neg_moment
from khinlab.specfun import C_p, DEFAULT_P_GRID, c2, c_inf, p0

SEED = 20240611


def _unit(rng, n):
    a = rng.standard_normal(n)
    return tuple(a / np.linalg.norm(a))


@pytest.mark.criterion(1, "p0 = 0.793 +- 0.001 in under 1 s")
def test_criterion_01_p0(record_property):
    specfun.p0.cache_clear()
    t = time.perf_counter()
    q = p0()
    elapsed = time.perf_counter() - t
    record_property("detail", f"p0 = {q:.10f}, runtime {elapsed:.4f} s")
    assert abs(q - 0.793) <= 0.001
    assert elapsed < 1.0


@pytest.mark.criterion(2, "slice volume at (1/sqrt2, 1/sqrt2, 0, ...) equals 2^(n-1) sqrt2 to 1e-10, n = 2..10, under 1 s")
def test_criterion_02_slice_volume(record_property):
    polydensity._cached_density.cache_clear()
    t = time.perf_counter()
    errs = []
    for n in range(2, 11):
        a = (2**-0.5, 2**-0.5) + (0.0,) * (n - 2)
        errs.append(abs(polydensity.slice_volume(a) - 2 ** (n - 1) * math.sqrt(2)))
    elapsed = time.perf_counter() - t
    record_property("detail", f"max abs error {max(errs):.2e}, runtime {elapsed:.4f} s")
    assert max(errs) <= 1e-10
    assert elapsed < 1.0


@pytest.mark.criterion(3, "exact, Fourier and Rao-Blackwell MC agree on 50 unit vectors x p in {0.2, 0.5, 0.8}")
def test_criterion_03_triple_oracle(record_property):
    t = time.perf_counter()
    rng = np.random.default_rng(SEED)
    sampler = sphere.SphereSampler(SEED)
    ps = (0.2, 0.5, 0.8)
    worst_quad = 0.0
    worst_z = 0.0
    mc_ok = True
    for _ in range(50):
        a = _unit(rng, int(rng.integers(2, 9)))
        estimates = sphere.rao_blackwell_moments(a, ps, 1_000_000, sampler)
        for p, est in zip(ps, estimates):
            exact = exact_neg_moment(a, p)
            worst_quad = max(worst_quad, abs(oscquad.fourier_neg_moment(a, p) / exact - 1))
            diff = abs(est.mean - (1 - p) * exact)
            mc_ok &= diff <= 4 * est.stderr + 1e-12 * exact
            if est.stderr > 0:
                worst_z = max(worst_z, diff / est.stderr)
    elapsed = time.perf_counter() - t
    record_property("detail", f"exact vs quadrature max rel {worst_quad:.2e}; MC max |z| {worst_z:.2f}; "
                              f"runtime {elapsed:.1f} s")
    assert worst_quad <= 1e-8
    assert mc_ok
    assert elapsed < 300


@pytest.mark.criterion(4, "main inequality on 1000 unit vectors (n <= 10) x 50 p, plus equality witnesses")
def test_criterion_04_main_inequality(record_property):
    rng = np.random.default_rng(SEED + 4)
    worst = 0.0
    for _ in range(1000):
        a = _unit(rng, int(rng.integers(1, 11)))
        for p in DEFAULT_P_GRID:
            worst = max(worst, exact_neg_moment(a, p) / C_p(p))
    two_point = max(abs(exact_neg_moment((2**-0.5, 2**-0.5), p) - c2(p)) / c2(p) for p in DEFAULT_P_GRID)
    gauss = extremize.equal_weight_moment(12, 0.2) / c_inf(0.2) - 1
    record_property("detail", f"max ratio to C_p {worst:.12f}; two-point rel error {two_point:.1e}; "
                              f"n=12 equal weights vs c_inf(0.2): {100 * gauss:+.3f}%")
    assert worst <= 1 + 1e-9
    assert two_point <= 1e-11
    assert abs(gauss) <= 0.02


@pytest.mark.criterion(5, "ball-integral inequality on s in {2, 2.5, 3, 4, 6, 10, 50, 1000} x 50 p, equality at s = 2 for the c2 branch")
def test_criterion_05_ball_integral(record_property):
    rep = verify.check_ball_int(verify.CheckOptions())
    eq = rep.params["s2_equality_error"]
    record_property("detail", f"worst relative margin {rep.worst_margin:.3e} at (s, p) = "
                              f"{tuple(round(v, 4) for v in rep.params['worst_at'])}; s=2 equality error {eq:.1e}")
    assert rep.worst_margin >= -1e-10
    assert eq <= 1e-10
    assert rep.passed


@pytest.mark.criterion(6, "numeric anchors: R1(1), R_m > 1, b2, b3, f(2/3), sup|cos - sinc|, t0 > 2")
def test_criterion_06_anchors(record_property):
    r11 = npverify.R_m(1, 1.0)
    r_min = min(npverify.R_m(m, p) for m in range(1, 201) for p in DEFAULT_P_GRID)
    b2, b3 = npverify.b_m(2), npverify.b_m(3)
    f23 = specfun.c2_cinf_sign_function(2 / 3)
    sup = npverify.sup_cos_minus_sinc()
    y1 = npverify.y1()
    t0_min = min(npverify.t0(y) for y in np.linspace(y1 / 100, y1, 100, endpoint=False))
    record_property("detail", f"R1(1)={r11:.6f} min R_m={r_min:.6f} b2={b2:.4f} b3={b3:.3f} f(2/3)={f23:.6f} "
                              f"sup={sup:.6f} min t0={t0_min:.4f}")
    assert r11 > 1.006
    assert r_min > 1
    assert b2 > 2.7 and b3 > 17
    assert f23 < -0.016
    assert 1 < sup < 1.2
    assert t0_min > 2


@pytest.mark.criterion(7, "F - G: one certified sign change for 10 p above p0 (sigma_p), at most one for 10 p below (1/sqrt6)")
def test_criterion_07_np_sign(record_property):
    q = p0()
    large = np.linspace(q + 0.01, 0.99, 12)[1:-1]
    small = np.linspace(0.01, q - 0.01, 12)[1:-1]
    results = []
    for p in large:
        r = npverify.count_sign_changes(p, specfun.sigma_p(p))
        results.append(("large", p, r))
    for p in small:
        r = npverify.count_sign_changes(p, 1 / math.sqrt(6))
        results.append(("small", p, r))
    counts = [r.count for _, _, r in results]
    record_property("detail", f"counts above p0 {counts[:10]}, below p0 {counts[10:]}; "
                              f"indeterminate {sum(r.indeterminate for _, _, r in results)}")
    for kind, p, r in results:
        assert not r.indeterminate, (kind, p)
        if kind == "large":
            assert r.count == 1, p
        else:
            assert r.count <= 1, p


@pytest.mark.criterion(8, "strengthened bound for 500 tails with sum a^2 <= 1 and 500 with sum a^2 > 1, p grid; base-lemma equality structure")
def test_criterion_08_one_large(record_property):
    rng = np.random.default_rng(SEED + 8)
    tails = verify.random_tails(rng, 500, True) + verify.random_tails(rng, 500, False)
    below = [t for t in tails if sum(x * x for x in t) <= 1]
    assert len(below) == 500
    worst = min(npverify.strengthened_margin(t, p) for t in tails for p in DEFAULT_P_GRID)
    # base lemma: equality at x = 1, and both sides of the reduced form vanish at x = 0
    eq1 = max(abs(polydensity.two_point_moment(1.0, p) / (c2(p) * npverify.phi(p, 1.0)) - 1) for p in DEFAULT_P_GRID)
    eq0 = max(abs(npverify.h_eval(p, 0.0)) for p in DEFAULT_P_GRID)
    eq_h1 = max(abs(npverify.h_eval(p, 1.0) - 2.0) for p in DEFAULT_P_GRID)
    lim0 = max(abs(polydensity.two_point_moment(1e-9, p) * (1 - p) - 1) for p in DEFAULT_P_GRID)
    record_property("detail", f"worst relative margin {worst:.3e}; x=1 equality error {eq1:.1e}; "
                              f"h(p,0) {eq0:.1e}; h(p,1)-2 {eq_h1:.1e}; x->0 limit error {lim0:.1e}")
    assert worst >= -1e-9
    assert eq1 <= 1e-13 and eq0 == 0.0 and eq_h1 <= 1e-15 and lim0 <= 1e-8


@pytest.mark.criterion(9, "h(p, x) <= 2x on a 200 x 200 grid, strict off the forced equality lines")
def test_criterion_09_xp(record_property):
    ps, xs = verify.xp_grid(200)
    strict = math.inf
    line_err = 0.0
    x1_err = 0.0
    for p in ps:
        for x in xs:
            gap = 2 * x - npverify.h_eval(p, x)
            if p == 0.0 or x == 0.0:
                line_err = max(line_err, abs(gap))
            elif x == 1.0 and p < 2.0:
                x1_err = max(x1_err, abs(gap))  # h(p, 1) = 2 identically
            else:
                strict = min(strict, gap)
    record_property("detail", f"min strict slack {strict:.3e}; lines p=0, x=0 error {line_err:.1e}; "
                              f"line x=1 error {x1_err:.1e}")
    assert strict > 0
    assert line_err <= 1e-15
    assert x1_err <= 1e-15


@pytest.mark.criterion(10, "matrix corollary on 50 tuples (n <= 4) x p in {0.2, 0.4, 0.6}; scalar embedding exact")
def test_criterion_10_matrix(record_property):
    rng = np.random.default_rng(SEED + 10)
    sampler = sphere.SphereSampler(SEED + 10)
    worst = math.inf
    statuses = []
    for _ in range(50):
        A = sphere.MatrixCoefficients.random(int(rng.integers(1, 5)), rng)
        for p in (0.2, 0.4, 0.6):
            r = sphere.matrix_corollary_check(A, p, 200_000, sampler)
            statuses.append(r.status)
            worst = min(worst, r.worst_margin / r.params["bound"])
    a = _unit(rng, 3)
    embedded = sphere.MatrixCoefficients(tuple(np.diag([x, 0.0, 0.0]) for x in a))
    scalar_err = 0.0
    for p in (0.2, 0.4, 0.6):
        r = sphere.matrix_corollary_check(embedded, p, 1000, sampler)
        statuses.append(r.status)
        assert r.params["method"] == "exact-scalar"
        assert r.params["estimate"] == exact_neg_moment(a, p)
        scalar_err = max(scalar_err, abs(oscquad.fourier_neg_moment(a, p) / r.params["estimate"] - 1))
    record_property("detail", f"worst relative slack {worst:.3f}; scalar embedding vs quadrature {scalar_err:.1e}")
    assert all(s == "pass" for s in statuses)
    assert scalar_err <= 1e-8
