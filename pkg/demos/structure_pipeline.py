"""
From an almost complex structure to solver coefficients
=======================================================

Samples a twisted product structure, checks its block form, extracts the
coefficient pair and hands it to the disc solver.
"""

import numpy as np

from jdisc.acstructure import (
    coefficients_from_structure,
    matrix_a_from_j,
    nondegeneracy_check,
    normalize_coordinates,
    sample_structure,
    twisted_product_structure,
    verify_block_structure,
)
from jdisc.beltrami import SolverConfig, outer_iterate

S = sample_structure(twisted_product_structure(0.05), gamma=0.5, n=1500)
print("block checks:", verify_block_structure(S)["deviations"])
print("min |det(J + J_st)|:", nondegeneracy_check(S))
print("sup |a|:", np.abs(matrix_a_from_j(S).A[:, 0, 0]).max())

# quadratic coordinates in which the first derivatives of A vanish at 0
phi = normalize_coordinates(S)
print("A_z(0) after normalization:", phi.residual_Az)

coeffs = coefficients_from_structure(S)
print(len(coeffs.a_terms), "terms in a,", len(coeffs.b_terms), "terms in b, a0 =", round(coeffs.a0, 4))

_, report = outer_iterate(coeffs, SolverConfig(n=8, n_radial=48, n_angular=128))
print("solved in", report.outer_iters, "iterations, winding", report.winding_z)
