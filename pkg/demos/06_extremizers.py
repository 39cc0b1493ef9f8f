"""Searching for the worst weight vector at fixed n.

Below p0 equal weights approach c_inf from below as n grows; above p0 the
two-point vector attains c2 exactly.
"""

from khinlab.extremize import equal_weight_moment, optimize_weights
from khinlab.specfun import C_p, c_inf

for p in (0.3, 0.9):
    r = optimize_weights(4, p, restarts=6, seed=1)
    print(f"p = {p}: best b = {[round(float(x), 4) for x in r.b]}, ratio to C_p {r.ratio_to_Cp:.8f}")

print("equal weights at p = 0.2, relative to c_inf:")
for n in (2, 4, 8, 12):
    print(f"   n = {n:2d}: {equal_weight_moment(n, 0.2) / c_inf(0.2):.6f}   (C_p ratio {equal_weight_moment(n, 0.2) / C_p(0.2):.6f})")
