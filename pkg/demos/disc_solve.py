"""
A disc with boundary on the torus
=================================

Solves the quasilinear system for ``a = b = 0.1 w`` and prints the
diagnostics of the resulting disc.
"""

from jdisc.beltrami import CoefficientPair, SolverConfig, Term, outer_iterate

coeffs = CoefficientPair([Term(0.1, k=1)], [Term(0.1, k=1)], gamma=0.5)

# the exponent p is picked so that a0 * ||R0||_p stays below 1
sol, report = outer_iterate(coeffs, SolverConfig(n=8, n_radial=48, n_angular=128))

print("exponent p:", report.p, "outer iterations:", report.outer_iters)
print("boundary residual:", report.residuals["boundary"])
print("winding of z on the circle:", report.winding_z)
print("min Jacobian of z:", round(report.min_jacobian, 4))
print("|w| <= C |zeta|^n with C =", round(report.envelope_C, 6))

# contraction of the inner loop against its a priori bound
print("worst inner ratio:", round(report.max_contraction_ratio, 4), "bound:", round(report.a0 * report.norm_estimate, 4))
