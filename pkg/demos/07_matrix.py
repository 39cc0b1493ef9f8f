"""Matrix-valued coefficients.

For random square matrices A_k the median-of-means estimate of
E||sum A_k U_k||^{-p} (operator norm over the sphere) is compared with the
bound obtained from the scalar inequality.
"""

import numpy as np

from khinlab.sphere import MatrixCoefficients, SphereSampler, matrix_corollary_check

rng = np.random.default_rng(3)
sampler = SphereSampler(3)
for n in (2, 3, 4):
    A = MatrixCoefficients.random(n, rng)
    r = matrix_corollary_check(A, 0.4, 200_000, sampler)
    print(f"n = {n}: estimate {r.params['estimate']:.5f} vs bound {r.params['bound']:.5f} [{r.status}]")
