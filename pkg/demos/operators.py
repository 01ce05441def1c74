"""
Singular integrals on a polar grid
==================================

Builds a field, applies the Cauchy-Green and Beurling transforms and checks
a few identities by eye.
"""

import numpy as np

from jdisc import DiscGrid, field, norm
from jdisc.discfield import dbar
from jdisc.transforms import cauchy_green, r0, t0

# 48 radial nodes (the last one on the circle) and 128 angles
grid = DiscGrid(48, 128)
f = field(grid, lambda z: np.conj(z) ** 2 * z + 0.5 * z**3 + 1)

# T inverts d/d(conj zeta) inside the disc
interior = grid.radial_nodes < 1
print("dbar(T f) - f:", np.abs((dbar(cauchy_green(f)) - f).values[interior]).max())

# T0 has purely imaginary boundary values
print("max |Re T0 f| on the circle:", np.abs(t0(f).boundary().values.real).max())

# R0 keeps the L^2 norm
print("||R0 f|| / ||f||:", norm(r0(f), 2) / norm(f, 2))
