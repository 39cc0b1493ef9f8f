"""The sinc-power integral Psi_p(s) against its bound.

Equality holds at s = 2 on the branch where C_p = c2, and the bound has
room to spare as s grows.
"""

from khinlab.oscquad import ball_integral_rhs, psi

for p in (0.3, 0.85):
    rhs = ball_integral_rhs(p)
    print(f"p = {p}: bound {rhs:.10f}")
    for s in (2, 2.5, 3, 4, 10, 50, 1000):
        v = psi(s, p).value
        print(f"   s = {s:6}: Psi = {v:.10f}  relative margin {1 - v / rhs:.2e}")
