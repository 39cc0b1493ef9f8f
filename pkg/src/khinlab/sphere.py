"""Random vectors on the unit sphere of R^3 and Monte Carlo negative moments.

Sampling uses the hat-box parametrisation: the first coordinate of a
uniform point on S^2 is uniform on [-1, 1] and the azimuth is uniform.
Work is split into fixed-size blocks, each drawn from its own Philox
substream, so estimates do not depend on the number of worker threads.
"""

from __future__ import annotations

import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError
from .polydensity import WeightVector, exact_neg_moment
from .report import VerificationReport, status_from
from .specfun import C_p

BLOCK = 1 << 16
MOM_BLOCKS = 16
#: Largest p for which the plain matrix estimator is used for certification.
MATRIX_P_CAP = 0.6


def default_seed():
    env = os.environ.get("KHINLAB_SEED")
    return int(env) if env else 20240611


def default_threads():
    env = os.environ.get("KHINLAB_THREADS")
    return max(1, int(env)) if env else 1


@dataclass
class SphereSampler:
    """Counter-based source of independent substreams.

    Every request reserves a range of substream indices and advances
    ``counter`` past it, so a sampler replays identically from the same
    ``(seed, counter)``.
    """

    seed: int = field(default_factory=default_seed)
    counter: int = 0

    def __post_init__(self):
        self.seed = int(self.seed) % (1 << 64)

    def substream(self, index):
        return np.random.Generator(np.random.Philox(key=self.seed).jumped(int(index)))

    def reserve(self, k):
        start = self.counter
        self.counter += int(k)
        return start


def _hat_box(rng, shape):
    u = rng.uniform(-1.0, 1.0, size=shape)
    theta = rng.uniform(0.0, 2.0 * math.pi, size=shape)
    rho = np.sqrt(np.maximum(0.0, 1.0 - u * u))
    return np.stack([u, rho * np.cos(theta), rho * np.sin(theta)], axis=-1)


def sample_sphere(s, count):
    """``count`` uniform unit vectors in R^3, shape ``(count, 3)``."""
    if count < 1:
        raise DomainError("count must be at least 1")
    nblocks = -(-count // BLOCK)
    start = s.reserve(nblocks)
    parts = []
    for b in range(nblocks):
        m = min(BLOCK, count - b * BLOCK)
        parts.append(_hat_box(s.substream(start + b), (m,)))
    return np.concatenate(parts)


def _map_blocks(fn, nblocks, threads):
    if threads <= 1 or nblocks == 1:
        return [fn(b) for b in range(nblocks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(nblocks)))


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    n: int


def conditional_moment(r, c, p):
    """``E||x + c xi||^{-p}`` for ``||x|| = r``: ``((r+c)^{2-p} - |r-c|^{2-p}) / (2(2-p) r c)``.

    Written as ``M^{-p} k(m/M)`` with ``M = max(r, c)``, ``m = min(r, c)``
    and ``k(x) = ((1+x)^{2-p} - (1-x)^{2-p}) / (2(2-p)x)``, evaluated
    with expm1/log1p so that ``k(0) = 1`` is approached smoothly.
    """
    r = np.asarray(r, dtype=float)
    big = np.maximum(r, c)
    x = np.minimum(r, c) / big
    q = 2.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = np.where(x < 1.0, np.expm1(q * np.log1p(-x)), -1.0)
        k = (np.expm1(q * np.log1p(x)) - lo) / (2.0 * q * x)
    k = np.where(x > 0.0, k, 1.0)
    return big ** (-p) * k


def _weights(a):
    w = np.abs(np.asarray(a.a if isinstance(a, WeightVector) else a, dtype=float))
    w = w[w > 0]
    if w.size == 0:
        raise DomainError("weight vector needs at least one nonzero entry")
    return w


def rao_blackwell_moments(a, ps, n_samples, s, threads=None):
    """Estimates of ``E||sum a_k xi_k||^{-p}`` for every p in ``ps`` from one sample.

    The largest weight ``c`` is integrated out in closed form; the rest of
    the sum is sampled.  Each sample is at most ``c^{-p}``, so the
    estimator has finite variance for every p in (0, 1).
    """
    ps = [float(p) for p in ps]
    for p in ps:
        if not 0.0 < p < 1.0:
            raise DomainError(f"moment order p must lie in (0, 1), got {p!r}")
    w = _weights(a)
    i = int(np.argmax(w))
    c = float(w[i])
    rest = np.delete(w, i)
    if rest.size == 0:
        return [MCEstimate(c ** (-p), 0.0, 0) for p in ps]
    if n_samples < 2:
        raise DomainError("need at least two samples")
    nblocks = -(-n_samples // BLOCK)
    start = s.reserve(nblocks)

    def block(b):
        m = min(BLOCK, n_samples - b * BLOCK)
        xi = _hat_box(s.substream(start + b), (rest.size, m))
        r = np.linalg.norm(np.einsum("k,kmj->mj", rest, xi), axis=1)
        vals = [conditional_moment(r, c, p) for p in ps]
        return [(math.fsum(v), math.fsum(v * v)) for v in vals]

    sums = _map_blocks(block, nblocks, threads or default_threads())
    out = []
    for j in range(len(ps)):
        s1 = math.fsum(b[j][0] for b in sums)
        s2 = math.fsum(b[j][1] for b in sums)
        mean = s1 / n_samples
        var = max(0.0, (s2 - n_samples * mean * mean) / (n_samples - 1))
        out.append(MCEstimate(mean, math.sqrt(var / n_samples), n_samples))
    return out


def rao_blackwell_moment(a, p, n_samples, s, threads=None):
    """Single-p version of :func:`rao_blackwell_moments`."""
    return rao_blackwell_moments(a, [p], n_samples, s, threads)[0]


def _report(name, t_start, s, **kw):
    return VerificationReport(check_name=name, runtime_ms=int(1000 * (time.perf_counter() - t_start)), seed=s.seed, **kw)


def konig_identity_check(a, p, n_samples, s=None):
    """Compare the sphere moment with ``(1-p) E|sum a_k U_k|^{-p}`` within four standard errors."""
    s = s or SphereSampler()
    t = time.perf_counter()
    w = _weights(a)
    est = rao_blackwell_moment(w, p, n_samples, s)
    target = (1.0 - p) * exact_neg_moment(tuple(w), p)
    margin = 4.0 * est.stderr + 1e-12 * target - abs(est.mean - target)
    return _report(
        "konig",
        t,
        s,
        params={"p": p, "n": int(w.size), "estimate": est.mean, "stderr": est.stderr, "exact": target},
        grid_spec=f"N={n_samples}",
        worst_margin=margin,
        status=status_from(margin >= 0),
    )


def projection_upper_bound_check(a, p, n_samples, s=None, tol=1e-12):
    """``E||sum a_k xi_k||^{-p} <= min_k |a_k|^{-p}``, over the nonzero weights."""
    s = s or SphereSampler()
    t = time.perf_counter()
    w = _weights(a)
    est = rao_blackwell_moment(w, p, n_samples, s)
    bound = float(w.max()) ** (-p)
    margin = bound * (1.0 + tol) - est.mean
    return _report(
        "projection",
        t,
        s,
        params={"p": p, "n": int(w.size), "estimate": est.mean, "stderr": est.stderr, "bound": bound},
        grid_spec=f"N={n_samples}",
        worst_margin=margin,
        status=status_from(margin >= 0),
    )


def reversal_check(a, p, n_samples, s=None):
    """``E||sum a_k xi_k||^{-p} >= (sum a_k^2)^{-p/2}`` within four standard errors."""
    s = s or SphereSampler()
    t = time.perf_counter()
    w = _weights(a)
    est = rao_blackwell_moment(w, p, n_samples, s)
    bound = float(np.sum(w * w)) ** (-p / 2)
    margin = est.mean + 4.0 * est.stderr - bound * (1.0 - 1e-12)
    return _report(
        "reversal",
        t,
        s,
        params={"p": p, "n": int(w.size), "estimate": est.mean, "stderr": est.stderr, "bound": bound},
        grid_spec=f"N={n_samples}",
        worst_margin=margin,
        status=status_from(margin >= 0),
    )


@dataclass(frozen=True)
class MatrixCoefficients:
    """Real 3x3 coefficient matrices ``A_1, ..., A_n``."""

    matrices: tuple

    def __post_init__(self):
        mats = tuple(np.array(m, dtype=float).reshape(3, 3) for m in self.matrices)
        if not mats:
            raise DomainError("need at least one matrix")
        object.__setattr__(self, "matrices", mats)
        if self.hs_total <= 0:
            raise DomainError("matrices must not all vanish")

    @classmethod
    def random(cls, n, rng):
        return cls(tuple(rng.standard_normal((3, 3)) for _ in range(n)))

    @cached_property
    def hs_norms(self):
        return tuple(float(np.linalg.norm(m)) for m in self.matrices)

    @property
    def hs_total(self):
        return math.fsum(h * h for h in self.hs_norms)

    def __len__(self):
        return len(self.matrices)

    def scalar_reduction(self, rtol=1e-12):
        """Weights ``||b_k||`` when every ``A_k = u b_k^T`` for one unit vector u, else None.

        In that case ``sum A_k xi_k = u sum <b_k, xi_k>`` and each
        ``<b_k, xi_k>`` is uniform on ``[-||b_k||, ||b_k||]``.
        """
        stacked = np.hstack(self.matrices)
        U, sv, _ = np.linalg.svd(stacked)
        if sv[1] > rtol * sv[0]:
            return None
        u = U[:, 0]
        return tuple(float(np.linalg.norm(m.T @ u)) for m in self.matrices)


def matrix_moment_mom(A, p, n_samples, s, blocks=MOM_BLOCKS, threads=None):
    """Median-of-means estimate of ``E||sum A_k xi_k||^{-p}`` and its dispersion.

    The dispersion is ``1.2533 * sd(block means) / sqrt(blocks)``, the
    normal-theory standard error of a median.
    """
    per = -(-n_samples // blocks)
    sub = -(-per // BLOCK)
    start = s.reserve(blocks * sub)
    mats = np.stack(A.matrices)

    def block(b):
        total = 0.0
        for j in range(sub):
            m = min(BLOCK, per - j * BLOCK)
            xi = _hat_box(s.substream(start + b * sub + j), (len(A), m))
            y = np.einsum("kij,kmj->mi", mats, xi)
            total += math.fsum(np.linalg.norm(y, axis=1) ** (-p))
        return total / per

    means = np.array(_map_blocks(block, blocks, threads or default_threads()))
    disp = 1.2533 * float(np.std(means, ddof=1)) / math.sqrt(blocks)
    return float(np.median(means)), disp


def matrix_corollary_check(A, p, n_samples, s=None):
    """``E||sum A_k xi_k||^{-p} <= C_p (sum ||A_k||_HS^2)^{-p/2}``.

    When the matrices share a one-dimensional range the left side is an
    exact scalar moment and no sampling is done.  Above ``p = 0.6`` the
    plain estimator may have infinite variance; the report then carries a
    warning.
    """
    s = s or SphereSampler()
    t = time.perf_counter()
    if not isinstance(A, MatrixCoefficients):
        A = MatrixCoefficients(tuple(A))
    bound = C_p(p) * A.hs_total ** (-p / 2)
    params = {"p": p, "n": len(A), "bound": bound}
    red = A.scalar_reduction()
    if red is not None:
        exact = exact_neg_moment(red, p)
        margin = bound * (1.0 + 1e-9) - exact
        params.update(method="exact-scalar", estimate=exact, dispersion=0.0)
        return _report("corollary", t, s, params=params, grid_spec="exact", worst_margin=margin,
                       status=status_from(margin >= 0))
    if p > MATRIX_P_CAP:
        msg = f"p = {p} exceeds {MATRIX_P_CAP}; plain estimator may have infinite variance"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        params["warning"] = msg
    est, disp = matrix_moment_mom(A, p, n_samples, s)
    margin = bound + 4.0 * disp - est
    params.update(method="median-of-means", estimate=est, dispersion=disp)
    return _report("corollary", t, s, params=params, grid_spec=f"N={n_samples},blocks={MOM_BLOCKS}",
                   worst_margin=margin, status=status_from(margin >= 0))
