"""The two candidate constants and where they cross.

c2(p) comes from the two-point vector (1/sqrt2, 1/sqrt2); c_inf(p) is the
Gaussian limit. The sharp constant C_p is the larger one, with the switch
at p0.
"""

from khinlab.specfun import C_p, c2, c_inf, cp_branch, p0

print(f"crossing point p0 = {p0():.12f}")
print(f"{'p':>5} {'c2':>12} {'c_inf':>12} {'C_p':>12} branch")
for p in (0.1, 0.3, 0.5, 0.7, 0.79, 0.8, 0.9, 0.95):
    print(f"{p:5.2f} {c2(p):12.6f} {c_inf(p):12.6f} {C_p(p):12.6f} {cp_branch(p)}")
