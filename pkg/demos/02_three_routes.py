"""One moment computed three independent ways.

The exact route integrates the piecewise-polynomial density. The Fourier
route integrates a product of sincs against |t|^(p-1). The Monte Carlo
route samples the sphere and returns (1 - p) times the moment.
"""

from khinlab.oscquad import fourier_neg_moment
from khinlab.polydensity import exact_neg_moment
from khinlab.sphere import SphereSampler, rao_blackwell_moment

a = (0.6, 0.5, 0.4, 0.3, 0.3, 0.2)
p = 0.5
exact = exact_neg_moment(a, p)
fourier = fourier_neg_moment(a, p)
mc = rao_blackwell_moment(a, p, 400_000, SphereSampler(7))
print(f"weights {a}, p = {p}")
print(f"exact          {exact:.15f}")
print(f"fourier        {fourier:.15f}  (rel diff {fourier / exact - 1:.1e})")
print(f"MC / (1 - p)   {mc.mean / (1 - p):.6f} +- {mc.stderr / (1 - p):.6f}")
