"""Central sections of the cube [-1, 1]^n orthogonal to a unit vector.

The diagonal direction (1/sqrt2, 1/sqrt2, 0, ...) gives the largest
section, 2^(n-1) sqrt2.
"""

import math

from khinlab.polydensity import slice_volume

for n in range(2, 8):
    diag = (2**-0.5, 2**-0.5) + (0.0,) * (n - 2)
    flat = (1 / math.sqrt(n),) * n
    print(f"n={n}: diagonal {slice_volume(diag):9.4f}  (2^(n-1) sqrt2 = {2 ** (n - 1) * math.sqrt(2):9.4f}),"
          f"  equal weights {slice_volume(flat):9.4f}")
