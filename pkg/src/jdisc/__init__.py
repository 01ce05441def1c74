"""Pseudoholomorphic discs via singular integral operators on the unit disc."""

__version__ = "0.1.0"

from .discfield import ComplexField, DiscGrid, build_grid, dbar, dz, field, monomial, norm  # noqa: E402
from .transforms import ahlfors_beurling, bergman, cauchy_green, estimate_norm, r0, t0  # noqa: E402
from .beltrami import CoefficientPair, SolverConfig, Term, outer_iterate  # noqa: E402

__all__ = [
    "__version__",
    "ComplexField",
    "DiscGrid",
    "build_grid",
    "dbar",
    "dz",
    "field",
    "monomial",
    "norm",
    "ahlfors_beurling",
    "bergman",
    "cauchy_green",
    "estimate_norm",
    "r0",
    "t0",
    "CoefficientPair",
    "SolverConfig",
    "Term",
    "outer_iterate",
]
