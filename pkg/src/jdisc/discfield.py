"""Polar discretization of the closed unit disc and calculus on it.

Fields are stored as complex arrays of shape ``(n_radial, n_angular)``.
Angularly we work with the FFT; radially every mode is a polynomial
interpolant through Gauss-Radau nodes on ``[0, 1]`` whose fixed node is
``r = 1``, so boundary traces are read off the last ring directly.
"""

from dataclasses import dataclass
from functools import cached_property
import csv
import io

import numpy as np
from numpy.polynomial import legendre
from scipy.special import roots_jacobi

from .errors import ConfigurationError, UsageError

__all__ = [
    "DiscGrid",
    "ComplexField",
    "BoundaryTrace",
    "build_grid",
    "field",
    "monomial",
    "dbar",
    "dz",
    "norm",
    "inner",
    "to_csv",
    "from_csv",
]


def _radau_right(n):
    """Gauss-Radau nodes/weights on [-1, 1] with the fixed node at +1."""
    x, w = roots_jacobi(n - 1, 1.0, 0.0)
    w = w / (1.0 - x)
    return np.append(x, 1.0), np.append(w, 2.0 / n**2)


@dataclass(frozen=True)
class DiscGrid:
    """Tensor polar grid: ``n_radial`` Radau rings times ``n_angular`` angles.

    Two grids compare equal iff their counts agree, which is also what
    the operator caches key on.
    """

    n_radial: int
    n_angular: int

    def __post_init__(self):
        if int(self.n_radial) != self.n_radial or self.n_radial < 4:
            raise ConfigurationError(f"n_radial must be an integer >= 4, got {self.n_radial}")
        if int(self.n_angular) != self.n_angular or self.n_angular < 8 or self.n_angular % 2:
            raise ConfigurationError(
                f"n_angular must be an even integer >= 8, got {self.n_angular}"
            )

    @property
    def shape(self):
        return (self.n_radial, self.n_angular)

    @cached_property
    def _radau(self):
        return _radau_right(self.n_radial)

    @cached_property
    def radial_nodes(self):
        return 0.5 * (self._radau[0] + 1.0)

    @cached_property
    def radial_weights(self):
        """Weights for ``int_0^1 g(r) dr`` at the radial nodes."""
        return 0.5 * self._radau[1]

    @cached_property
    def theta(self):
        return 2.0 * np.pi * np.arange(self.n_angular) / self.n_angular

    @cached_property
    def quad_weights(self):
        """Area weights per node; they sum to pi."""
        ring = self.radial_weights * self.radial_nodes * (2.0 * np.pi / self.n_angular)
        return np.repeat(ring[:, None], self.n_angular, axis=1)

    @cached_property
    def r(self):
        return np.repeat(self.radial_nodes[:, None], self.n_angular, axis=1)

    @cached_property
    def zeta(self):
        return self.r * np.exp(1j * self.theta)[None, :]

    @cached_property
    def modes(self):
        """Integer Fourier mode of each FFT column."""
        return np.rint(np.fft.fftfreq(self.n_angular, 1.0 / self.n_angular)).astype(int)

    @cached_property
    def _vandermonde_inv(self):
        x = self._radau[0]
        return np.linalg.inv(legendre.legvander(x, self.n_radial - 1))

    def interpolation_matrix(self, r):
        """Matrix mapping nodal radial values to values at radii ``r``."""
        r = np.asarray(r, dtype=float)
        vander = legendre.legvander(2.0 * r.ravel() - 1.0, self.n_radial - 1)
        return (vander @ self._vandermonde_inv).reshape(r.shape + (self.n_radial,))

    @cached_property
    def diff_matrix(self):
        """Radial differentiation ``d/dr`` acting on nodal values."""
        n = self.n_radial
        x = self._radau[0]
        dvander = np.empty((n, n))
        for k in range(n):
            e = np.zeros(n)
            e[k] = 1.0
            dvander[:, k] = legendre.legval(x, legendre.legder(e))
        return 2.0 * dvander @ self._vandermonde_inv

    def to_modes(self, values):
        return np.fft.fft(values, axis=1) / self.n_angular

    def from_modes(self, coeffs):
        return np.fft.ifft(coeffs, axis=1) * self.n_angular

    def shift_modes(self, coeffs, shift):
        """Move mode ``k`` to ``k + shift``; modes leaving the band are dropped."""
        out = np.zeros_like(coeffs)
        half = self.n_angular // 2
        target = self.modes + shift
        keep = (target >= -half) & (target < half)
        out[:, target[keep] % self.n_angular] = coeffs[:, keep]
        return out


def build_grid(n_radial, n_angular):
    return DiscGrid(n_radial, n_angular)


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex samples on a :class:`DiscGrid`."""

    grid: DiscGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            raise UsageError(f"values shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite samples")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def _coerce(self, other):
        if isinstance(other, ComplexField):
            if other.grid != self.grid:
                raise UsageError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return ComplexField(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return ComplexField(self.grid, self.values - self._coerce(other))

    def __rsub__(self, other):
        return ComplexField(self.grid, self._coerce(other) - self.values)

    def __mul__(self, other):
        return ComplexField(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return ComplexField(self.grid, -self.values)

    def conj(self):
        return ComplexField(self.grid, np.conj(self.values))

    def boundary(self):
        return BoundaryTrace(self.values[-1].copy())


@dataclass(frozen=True, eq=False)
class BoundaryTrace:
    """Samples of a field on the unit circle, one per angular node."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))

    def __len__(self):
        return len(self.values)


def field(grid, func):
    """Sample ``func(zeta)`` on the grid."""
    return ComplexField(grid, np.broadcast_to(func(grid.zeta), grid.shape))


def monomial(grid, a, b):
    """The field ``zeta**a * conj(zeta)**b``; ``a`` may be negative when ``a + b >= 0``."""
    if a + b < 0:
        raise ConfigurationError("monomial must be bounded at the origin")
    return ComplexField(grid, grid.r ** (a + b) * np.exp(1j * (a - b) * grid.theta)[None, :])


def _radial_derivative_terms(f):
    grid = f.grid
    coeffs = grid.to_modes(f.values)
    dr = grid.diff_matrix @ coeffs
    over_r = grid.modes[None, :] * coeffs / grid.radial_nodes[:, None]
    return grid, dr, over_r


def dbar(f):
    """``d f / d conj(zeta) = (e^{i theta} / 2)(d_r + (i / r) d_theta) f``."""
    grid, dr, over_r = _radial_derivative_terms(f)
    out = grid.shift_modes(0.5 * (dr - over_r), 1)
    return ComplexField(grid, grid.from_modes(out))


def dz(f):
    """``d f / d zeta = (e^{-i theta} / 2)(d_r - (i / r) d_theta) f``."""
    grid, dr, over_r = _radial_derivative_terms(f)
    out = grid.shift_modes(0.5 * (dr + over_r), -1)
    return ComplexField(grid, grid.from_modes(out))


def _check_exponent(p):
    if isinstance(p, str):
        if p.lower() not in ("inf", "sup"):
            raise ConfigurationError(f"unknown norm exponent {p!r}")
        return np.inf
    if not p >= 1:
        raise ConfigurationError(f"norm exponent must be >= 1, got {p}")
    return float(p)


def norm(f, p=2):
    """``L^p(D)`` norm by quadrature; ``p = inf`` (or ``"sup"``) is the sample maximum."""
    p = _check_exponent(p)
    values = f.values if isinstance(f, ComplexField) else np.asarray(f)
    mod = np.abs(values)
    if np.isinf(p):
        return float(mod.max())
    grid = f.grid
    return float(np.sum(grid.quad_weights * mod**p) ** (1.0 / p))


def inner(f, g):
    """``int_D f conj(g) dA``."""
    if f.grid != g.grid:
        raise UsageError("fields live on different grids")
    return complex(np.sum(f.grid.quad_weights * f.values * np.conj(g.values)))


def to_csv(f):
    """Serialize as ``r,theta,re,im`` rows, radius-major, 17 significant digits."""
    grid = f.grid
    buf = io.StringIO()
    buf.write("r,theta,re,im\n")
    for i, r in enumerate(grid.radial_nodes):
        for j, t in enumerate(grid.theta):
            v = f.values[i, j]
            buf.write(f"{r:.17g},{t:.17g},{v.real:.17g},{v.imag:.17g}\n")
    return buf.getvalue()


def from_csv(text, grid):
    rows = list(csv.DictReader(io.StringIO(text)))
    if len(rows) != grid.n_radial * grid.n_angular:
        raise UsageError("row count does not match grid")
    values = np.array([float(row["re"]) + 1j * float(row["im"]) for row in rows])
    return ComplexField(grid, values.reshape(grid.shape))
