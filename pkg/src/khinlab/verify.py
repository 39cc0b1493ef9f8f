"""Registry of numerical lemma checks, each producing a :class:`VerificationReport`.

Every check runs on an explicit grid that is recorded in the report, and
random inputs are drawn from a seeded generator, so a failing check can
be replayed exactly.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import extremize, npverify, oscquad, specfun, sphere
from .polydensity import exact_neg_moment, two_point_moment
from .report import VerificationReport, status_from
from .specfun import C_p, DEFAULT_P_GRID, c2, p0

BALL_S = (2.0, 2.5, 3.0, 4.0, 6.0, 10.0, 50.0, 1000.0)
MOMENT_TOL = 1e-9


@dataclass(frozen=True)
class CheckOptions:
    """Sizes shared by the checks; the defaults keep ``verify all`` to a few minutes."""

    seed: int = 20240611
    p_grid: tuple = DEFAULT_P_GRID
    np_sign_count: int = 4
    tails: int = 100
    mc_samples: int = 200_000
    matrix_tuples: int = 10


def _finish(name, t0, margin, ok, grid, params=None, seed=None, indeterminate=False):
    return VerificationReport(
        check_name=name,
        params=params or {},
        grid_spec=grid,
        worst_margin=margin,
        status=status_from(ok, indeterminate),
        runtime_ms=int(1000 * (time.perf_counter() - t0)),
        seed=seed,
    )


def _grid_label(opts):
    g = opts.p_grid
    return f"p: {len(g)} points on [{min(g):.4g}, {max(g):.4g}]"


# -- constants and special functions ---------------------------------------------


def check_c2_cinf(opts):
    t = time.perf_counter()
    changes = specfun.count_sign_changes_c2_cinf()
    root = p0()
    f23 = specfun.c2_cinf_sign_function(2.0 / 3.0)
    margins = [0.001 - abs(root - 0.793), -0.016 - f23]
    ok = changes == 1 and min(margins) > 0
    return _finish("c2-cinf", t, min(margins), ok, "p: 2001 uniform points on [1e-4, 1-1e-4]",
                   {"p0": root, "sign_changes": changes, "f(2/3)": f23})


def check_gamma(opts):
    t = time.perf_counter()
    m = min(specfun.gamma_lemma_margin(p) for p in opts.p_grid)
    return _finish("gamma", t, m, m >= 0, _grid_label(opts))


def check_ball_int(opts, s_values=BALL_S):
    """``Psi_p(s) <= C_p / (2 b_{p,1})`` on the s list times the p grid, equality at s = 2 for p > p0."""
    t = time.perf_counter()
    worst = math.inf
    worst_at = None
    eq_err = 0.0
    for s in s_values:
        for p in opts.p_grid:
            v = oscquad.psi(s, p)
            rhs = oscquad.ball_integral_rhs(p)
            m = 1.0 - (v.value - v.tail_bound) / rhs
            if m < worst:
                worst, worst_at = m, (s, p)
            if s == 2.0 and p > p0():
                eq_err = max(eq_err, abs(v.value / rhs - 1.0))
    ok = worst >= -1e-10 and eq_err <= 1e-10
    return _finish("ball-int", t, worst, ok, f"s: {list(s_values)}; " + _grid_label(opts),
                   {"worst_at": worst_at, "s2_equality_error": eq_err})


# -- elementary lemmas -------------------------------------------------------------


def check_cos_sin(opts):
    t = time.perf_counter()
    v = npverify.sup_cos_minus_sinc()
    return _finish("cos-sin", t, 1.2 - v, 1.0 < v < 1.2, "t: 200001 points on (0, 50] + bounded refinement",
                   {"sup": v})


def check_t0(opts, count=100):
    t = time.perf_counter()
    y1 = npverify.y1()
    ys = np.linspace(y1 / count, y1, count, endpoint=False)
    m = min(npverify.t0(y) for y in ys) - 2.0
    return _finish("t0", t, m, m > 0, f"y: {count} points on [y1/{count}, y1)", {"y1": y1})


def check_FG(opts, m_max=200):
    """``R_m(p) > 1``, the numeric anchors of its proof, and the derivative-ratio bound."""
    t = time.perf_counter()
    ps = sorted(set(opts.p_grid) | {0.0, 1.0})
    r_min = min(npverify.R_m(m, p) for m in range(1, m_max + 1) for p in ps)
    anchors = {
        "R1(1)": npverify.R_m(1, 1.0),
        "b2": npverify.b_m(2),
        "b3": npverify.b_m(3),
        "R1'(1)": npverify.R1_slope_at_one(),
    }
    margins = [r_min - 1.0, anchors["R1(1)"] - 1.006, anchors["b2"] - 2.7, anchors["b3"] - 17.0]
    seq = npverify.successive_maxima(21)
    ratio_margin = math.inf
    for p in (0.2, 0.5, 0.8, 0.95):
        sig = specfun.sigma_p(p)
        for m in range(1, 21):
            y = math.sqrt(seq.y[m - 1] * seq.y[m])  # inside (y_{m+1}, y_m)
            r = npverify.ratio_F_over_G(y, p, sig)
            ratio_margin = min(ratio_margin, min(r.ratio, r.ratio_exact) / r.bound - 1.0)
    margins.append(ratio_margin)
    anchors["R_min"] = r_min
    anchors["ratio_margin"] = ratio_margin
    return _finish("FG", t, min(margins), min(margins) > 0,
                   f"m <= {m_max}; " + _grid_label(opts) + " plus p in {0, 1}", anchors)


def xp_grid(num=200):
    ps = np.linspace(0.0, 2.0, num)
    xs = np.linspace(0.0, 1.0, num)
    return ps, xs


def check_xp(opts, num=200):
    """``h(p, x) <= 2x``, strict except on p = 0, x = 0 and x = 1 (p < 2), where equality is exact."""
    t = time.perf_counter()
    ps, xs = xp_grid(num)
    strict = math.inf
    line_err = 0.0
    for p in ps:
        for x in xs:
            gap = 2.0 * x - npverify.h_eval(p, x)
            if p == 0.0 or x == 0.0 or (x == 1.0 and p < 2.0):
                line_err = max(line_err, abs(gap))
            else:
                strict = min(strict, gap)
    mono = all(
        np.all(np.diff([npverify.h_eval(p, x) for p in ps]) < 0) for x in np.linspace(0.05, 0.95, 20)
    )
    ok = strict > 0 and line_err <= 1e-14 and mono
    return _finish("xp", t, strict, ok, f"{num}x{num} grid on [0,2]x[0,1]",
                   {"equality_line_error": line_err, "decreasing_in_p": mono})


def check_phi_concave(opts, pairs=10_000):
    t = time.perf_counter()
    rng = np.random.default_rng(opts.seed)
    a = rng.uniform(0.0, 2.0, pairs)
    b = rng.uniform(0.0, 2.0 - a)
    worst = math.inf
    for p in opts.p_grid[::5]:
        for x, y in zip(a, b):
            worst = min(worst, npverify.phi(p, (x + y) / 2) - (npverify.phi(p, x) + npverify.phi(p, y)) / 2)
        for bb in (1.1, 1.5, 1.9):
            worst = min(worst, npverify.phi(p, 1.0) - (npverify.phi(p, 2 - bb) + npverify.phi(p, bb)) / 2)
    return _finish("phi-concave", t, worst, worst >= -1e-12, f"{pairs} random pairs; every 5th grid p",
                   seed=opts.seed)


def check_base(opts, num=101):
    """``E|U1 + x U2|^{-p} <= c2(p) Phi_p(x^2)``, with equality at x = 1."""
    t = time.perf_counter()
    xs = np.linspace(0.0, 1.0, num)[1:]
    worst = math.inf
    eq = 0.0
    for p in opts.p_grid:
        for x in xs:
            lhs = two_point_moment(x, p)
            rhs = c2(p) * npverify.phi(p, x * x)
            worst = min(worst, 1.0 - lhs / rhs)
        eq = max(eq, abs(two_point_moment(1.0, p) / (c2(p) * npverify.phi(p, 1.0)) - 1.0))
        for x in (1.5, 3.0):  # beyond 1 the lemma follows by homogeneity
            worst = min(worst, 1.0 - exact_neg_moment((1.0, x), p) / (c2(p) * npverify.phi(p, x * x)))
        eq = max(eq, abs(npverify.h_eval(p, 0.0)), abs(npverify.h_eval(p, 1.0) - 2.0))
    ok = worst >= -1e-12 and eq <= 1e-12
    return _finish("base", t, worst, ok, f"x: {num - 1} points on (0, 1] plus {{1.5, 3}}; " + _grid_label(opts),
                   {"equality_error": eq})


def random_tails(rng, count, below_one, max_len=5):
    out = []
    for _ in range(count):
        k = int(rng.integers(1, max_len + 1))
        d = rng.standard_normal(k)
        d /= np.linalg.norm(d)
        r2 = rng.uniform(0.0, 1.0) if below_one else rng.uniform(1.0, 4.0)
        if r2 == 0.0:
            r2 = 0.5
        out.append(tuple(d * math.sqrt(r2)))
    return out


def check_one_large(opts):
    t = time.perf_counter()
    rng = np.random.default_rng(opts.seed)
    tails = random_tails(rng, opts.tails, True) + random_tails(rng, opts.tails, False)
    worst = math.inf
    for tail in tails:
        for p in opts.p_grid:
            worst = min(worst, npverify.strengthened_margin(tail, p))
    return _finish("one-large", t, worst, worst >= -MOMENT_TOL,
                   f"{opts.tails} tails with sum a^2 <= 1 and {opts.tails} with sum a^2 > 1; " + _grid_label(opts),
                   seed=opts.seed)


def check_np_sign(opts):
    """One certified crossing above p0 (sigma_p) and at most one below it (sigma = 1/sqrt 6)."""
    t = time.perf_counter()
    k = opts.np_sign_count
    q = p0()
    large = np.linspace(q + 0.01, 0.99, k + 2)[1:-1]
    small = np.linspace(0.01, q - 0.01, k + 2)[1:-1]
    ok = True
    indeterminate = False
    counts = {}
    for p in large:
        r = npverify.count_sign_changes(p, specfun.sigma_p(p))
        counts[f"{p:.4f}"] = r.count
        ok &= r.count == 1
        indeterminate |= r.indeterminate
    for p in small:
        r = npverify.count_sign_changes(p, 1.0 / math.sqrt(6.0))
        counts[f"{p:.4f}"] = r.count
        ok &= r.count <= 1
        indeterminate |= r.indeterminate
    return _finish("np-sign", t, 0.0 if ok else -1.0, ok,
                   f"{k} p in (p0+0.01, 0.99) with sigma_p; {k} p in (0.01, p0-0.01) with 1/sqrt6; 1000-point logit grid",
                   {"counts": counts}, indeterminate=indeterminate and ok)


# -- sphere ------------------------------------------------------------------------------


def _random_unit(rng, n):
    a = rng.standard_normal(n)
    return tuple(a / np.linalg.norm(a))


def _aggregate(name, t0, reports, grid, seed):
    worst = min(r.worst_margin for r in reports)
    ok = all(r.passed for r in reports)
    return _finish(name, t0, worst, ok, grid, {"cases": len(reports)}, seed=seed)


def check_konig(opts):
    t = time.perf_counter()
    rng = np.random.default_rng(opts.seed)
    s = sphere.SphereSampler(opts.seed)
    cases = [(1.0,), (2**-0.5, 2**-0.5), _random_unit(rng, 6), _random_unit(rng, 3)]
    reps = [sphere.konig_identity_check(a, p, opts.mc_samples, s) for a in cases for p in (0.2, 0.5, 0.7, 0.9)]
    return _aggregate("konig", t, reps, f"4 weight vectors x p in {{0.2,0.5,0.7,0.9}}; N={opts.mc_samples}", opts.seed)


def check_projection(opts):
    t = time.perf_counter()
    rng = np.random.default_rng(opts.seed)
    s = sphere.SphereSampler(opts.seed)
    cases = [(1.0,), (1.0, 1.0)] + [_random_unit(rng, int(n)) for n in rng.integers(2, 8, 4)]
    reps = [sphere.projection_upper_bound_check(a, p, opts.mc_samples, s) for a in cases for p in (0.2, 0.5, 0.8)]
    return _aggregate("projection", t, reps, f"6 weight vectors x p in {{0.2,0.5,0.8}}; N={opts.mc_samples}",
                      opts.seed)


def check_reversal(opts):
    t = time.perf_counter()
    rng = np.random.default_rng(opts.seed)
    s = sphere.SphereSampler(opts.seed)
    cases = [_random_unit(rng, int(n)) for n in rng.integers(1, 8, 6)]
    reps = [sphere.reversal_check(a, p, opts.mc_samples, s) for a in cases for p in (0.2, 0.5, 0.8)]
    return _aggregate("reversal", t, reps, f"6 weight vectors x p in {{0.2,0.5,0.8}}; N={opts.mc_samples}",
                      opts.seed)


def check_corollary(opts):
    t = time.perf_counter()
    rng = np.random.default_rng(opts.seed)
    s = sphere.SphereSampler(opts.seed)
    tuples = [sphere.MatrixCoefficients.random(int(rng.integers(1, 5)), rng) for _ in range(opts.matrix_tuples)]
    tuples.append(sphere.MatrixCoefficients((np.eye(3),)))
    tuples.append(sphere.MatrixCoefficients(tuple(np.diag([w, 0.0, 0.0]) for w in (2**-0.5, 2**-0.5))))
    reps = [sphere.matrix_corollary_check(A, p, opts.mc_samples, s) for A in tuples for p in (0.2, 0.4, 0.6)]
    return _aggregate("corollary", t, reps,
                      f"{len(tuples)} matrix tuples x p in {{0.2,0.4,0.6}}; N={opts.mc_samples}, 16 blocks", opts.seed)


CHECKS = {
    "FG": check_FG,
    "ball-int": check_ball_int,
    "base": check_base,
    "c2-cinf": check_c2_cinf,
    "corollary": check_corollary,
    "cos-sin": check_cos_sin,
    "gamma": check_gamma,
    "konig": check_konig,
    "np-sign": check_np_sign,
    "one-large": check_one_large,
    "phi-concave": check_phi_concave,
    "projection": check_projection,
    "reversal": check_reversal,
    "t0": check_t0,
    "xp": check_xp,
}


def run_checks(names, opts=None, threads=1):
    """Run the named checks; reports come back sorted by check name."""
    opts = opts or CheckOptions()
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(", ".join(unknown))
    names = sorted(set(names))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda n: CHECKS[n](opts), names))
    return [CHECKS[n](opts) for n in names]


def main_inequality_scan(count, n_max, p_grid=DEFAULT_P_GRID, seed=0, n_min=2):
    """``E|sum a_k U_k|^{-p} <= C_p`` over random unit vectors; returns the report and per-p worst ratios."""
    t = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = {p: 0.0 for p in p_grid}
    for _ in range(count):
        a = _random_unit(rng, int(rng.integers(n_min, n_max + 1)))
        for p in p_grid:
            worst[p] = max(worst[p], exact_neg_moment(a, p) / C_p(p))
    margin = min(1.0 + MOMENT_TOL - r for r in worst.values())
    rep = _finish("khin-unif", t, margin, margin >= 0,
                  f"{count} random unit vectors with {n_min} <= n <= {n_max}; p: {len(p_grid)} points",
                  {"n": n_max, "max_ratio": max(worst.values())}, seed=seed)
    return rep, [{"p": p, "max_ratio_to_Cp": r} for p, r in worst.items()]


def extremize_report(n, p, restarts=extremize.DEFAULT_RESTARTS, seed=0):
    t = time.perf_counter()
    res = extremize.optimize_weights(n, p, restarts=restarts, seed=seed)
    margin = C_p(p) * (1 + MOMENT_TOL) - res.max_seen
    return _finish("extremize", t, margin, margin >= 0, f"{restarts} restarts",
                   {"p": p, "n": n, "value": res.value, "ratio_to_Cp": res.ratio_to_Cp, "b": list(res.b),
                    "case": extremize.case_partition(res.best_a).value, "converged": res.converged,
                    "iterations": res.iterations}, seed=seed)
