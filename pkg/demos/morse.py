"""
Critical points of plurisubharmonic functions
=============================================

Puts a quadratic plus cubic function into normal form near a critical point
and builds the profile that carries a sublevel set across it.
"""

import numpy as np

from jdisc.acstructure import levi_eigenvalues_standard
from jdisc.morse import QuadraticData, crossing_profile, inclusion_check, morse_normal_form, slow_cutoff, takagi

B = np.array([[1.0 + 0.5j, 0.2 - 0.3j], [0.2 - 0.3j, -0.4 + 1.1j]])
U, d = takagi(B)
print("Takagi values:", d, "equal to singular values:", np.linalg.svd(B, compute_uv=False))

# slow cut-off: t phi' and t^2 phi'' stay below delta
for delta in (0.2, 0.1, 0.05):
    print("delta", delta, "bounds", slow_cutoff(delta).sampled_bounds())

a = np.array([[2.0, 0.3 + 0.2j], [0.3 - 0.2j, 1.0]])
q = QuadraticData(a, np.array([[3.0, 0.2j], [0.2j, 0.1]]), cubic=[(0.3, (2, 1, 0, 0))])
model = morse_normal_form(q, 1, eps=0.1, delta=0.05)
print("normal form coefficients:", model.coefficients)

radii = np.logspace(-4, -0.7, 500)
dirs = np.random.default_rng(0).normal(size=(500, 4))
pts = dirs / np.linalg.norm(dirs, axis=1)[:, None] * radii[:, None]
print("min Levi eigenvalue:", levi_eigenvalues_standard(model.real_function(), pts, h=1e-3 * radii).min())

prof = crossing_profile(1)
print("tau0, tau1:", prof.tau0, prof.tau1)
print("sublevel inclusions:", inclusion_check(prof)["violations"])
