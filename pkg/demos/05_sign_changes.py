"""Distribution-function comparison behind the Nazarov-Podkorytov step.

For each p the difference F - G of two distribution functions is scanned
on a grid and every sign change is certified by bisection.
"""

import math

from khinlab.npverify import count_sign_changes
from khinlab.specfun import p0, sigma_p

for p in (0.4, 0.7, p0() + 0.05, 0.95):
    sigma = sigma_p(p) if p > p0() else 1 / math.sqrt(6)
    r = count_sign_changes(p, sigma)
    print(f"p = {p:.4f} sigma = {sigma:.6f}: {r.count} sign change(s) at {[round(float(0.5 * (lo + hi)), 6) for lo, hi in r.crossings]}"
          f" [{r.status}]")
