"""Singular integral operators on the unit disc.

All kernels use ``dtau ^ dtau_bar = -2i dA``, so

* ``T f(z) = -(1/pi) int f(t) / (t - z) dA``   (``T 1 = conj(z)`` in D),
* ``R f = d/dz T f``                           (Beurling transform),
* ``B f(z) = -(1/pi) int f(t) / (1 - conj(t) z)^2 dA``, the negative of the
  classical Bergman projection,
* ``T0 f(z) = T f(z) - conj(T f(1 / conj z))`` and ``R0 f = R f + B conj(f)``.

Each operator acts on one angular mode at a time. For an input mode
``g(r) e^{i m theta}`` expanding the kernels in geometric series gives

    T:  mode m - 1,   -2 int_r^1 g(p) (r/p)^(m-1) dp          (m >= 1)
                      2r int_0^1 g(rs) s^(1-m) ds              (m <= 0)
    R:  mode m - 2,   g - 2(m-1) int_r^1 g(p) (r/p)^(m-2) dp/p (m >= 1)
                      g + 2(m-1) int_0^1 g(rs) s^(1-m) ds      (m <= 0)

The partial radial integrals are evaluated with Gauss-Legendre rules on
the target-dependent interval, using the polynomial interpolant of ``g``.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .discfield import ComplexField, DiscGrid, dbar, dz, norm
from .errors import ConfigurationError

__all__ = [
    "OperatorNormProfile",
    "cauchy_green",
    "ahlfors_beurling",
    "bergman",
    "t0",
    "r0",
    "estimate_norm",
    "random_polynomial_field",
    "verify_identities",
    "OPERATORS",
]


class _Kernels:
    """Per-mode radial matrices for one grid."""

    def __init__(self, grid):
        n = grid.n_radial
        half = grid.n_angular // 2
        n_q = n + grid.n_angular // 4
        s, ws = np.polynomial.legendre.leggauss(n_q)
        s, ws = 0.5 * (s + 1.0), 0.5 * ws
        r = grid.radial_nodes

        p_in = grid.interpolation_matrix(r[:, None] * s[None, :])  # (n, q, n)
        rho = r[:, None] + (1.0 - r[:, None]) * s[None, :]
        p_out = grid.interpolation_matrix(rho)
        w_out = (1.0 - r[:, None]) * ws[None, :]

        # inner[m'] for m = -m', m' = 0..half
        powers = 1.0 + np.arange(half + 1)
        w_in = ws[None, :] * s[None, :] ** powers[:, None]  # (half+1, q)
        self.inner = np.einsum("mk,ikj->mij", w_in, p_in)

        # outer kernels for m = 1..half-1
        ms = np.arange(1, half)
        ratio = r[:, None] / rho
        with np.errstate(divide="ignore", invalid="ignore"):
            w_t = w_out[None] * ratio[None] ** (ms[:, None, None] - 1)
            w_r = w_out[None] * ratio[None] ** np.maximum(ms[:, None, None] - 2, 0) / rho[None]
        self.outer_t = np.einsum("mik,ikj->mij", w_t, p_out)
        self.outer_r = np.einsum("mik,ikj->mij", w_r, p_out)
        self.half = half
        self.n_angular = grid.n_angular
        self.r = r

    def col(self, m):
        return m % self.n_angular

    def nonpos_integrals(self, coeffs):
        """``int_0^1 g_m(rs) s^(1-m) ds`` for every mode ``m <= 0``; shape (n, half+1)."""
        cols = [self.col(-k) for k in range(self.half + 1)]
        g = coeffs[:, cols].T[:, :, None]
        return (self.inner @ g)[:, :, 0].T

    def pos_integrals(self, coeffs, which):
        cols = [self.col(m) for m in range(1, self.half)]
        g = coeffs[:, cols].T[:, :, None]
        stack = self.outer_t if which == "T" else self.outer_r
        return (stack @ g)[:, :, 0].T


@lru_cache(maxsize=8)
def _kernels(grid):
    return _Kernels(grid)


def _modes_of(f):
    return f.grid.to_modes(f.values)


def _t_modes(grid, coeffs):
    """Mode coefficients of ``T f`` and the exterior moments ``c_m`` (m <= 0)."""
    k = _kernels(grid)
    half = k.half
    out = np.zeros_like(coeffs)
    r = k.r[:, None]
    inner = k.nonpos_integrals(coeffs)
    outer = k.pos_integrals(coeffs, "T")
    for idx in range(half + 1):
        m = -idx
        if m - 1 >= -half:
            out[:, k.col(m - 1)] = 2.0 * r[:, 0] * inner[:, idx]
    for idx, m in enumerate(range(1, half)):
        out[:, k.col(m - 1)] = -2.0 * outer[:, idx]
    exterior = inner[-1]  # r = 1 row
    return out, exterior


def _r_modes(grid, coeffs):
    k = _kernels(grid)
    half = k.half
    out = np.zeros_like(coeffs)
    inner = k.nonpos_integrals(coeffs)
    outer = k.pos_integrals(coeffs, "R")
    for idx in range(half + 1):
        m = -idx
        if m - 2 >= -half:
            out[:, k.col(m - 2)] = coeffs[:, k.col(m)] + 2.0 * (m - 1) * inner[:, idx]
    for idx, m in enumerate(range(1, half)):
        out[:, k.col(m - 2)] = coeffs[:, k.col(m)] - 2.0 * (m - 1) * outer[:, idx]
    return out


def _bergman_modes(grid, coeffs):
    k = _kernels(grid)
    out = np.zeros_like(coeffs)
    # int_0^1 g_m(p) p^(m+1) dp is the r = 1 row of the inner kernel for mode -m
    cols = [k.col(m) for m in range(k.half)]
    g = coeffs[:, cols].T[:, :, None]
    moments = (k.inner[: k.half, -1, :][:, None, :] @ g)[:, 0, 0]
    r = k.r
    for m in range(k.half):
        out[:, k.col(m)] = -2.0 * (m + 1) * moments[m] * r**m
    return out


def _reflection_modes(grid, exterior):
    """Modes of ``conj(T f(1 / conj z))`` inside D from exterior moments."""
    k = _kernels(grid)
    out = np.zeros((grid.n_radial, grid.n_angular), dtype=complex)
    for idx in range(k.half + 1):
        m = -idx
        if 1 - m < k.half:
            out[:, k.col(1 - m)] = 2.0 * np.conj(exterior[idx]) * k.r ** (1 - m)
    return out


def cauchy_green(f):
    """Cauchy-Green transform ``T f``; right inverse of ``d/d conj(zeta)``."""
    grid = f.grid
    out, _ = _t_modes(grid, _modes_of(f))
    return ComplexField(grid, grid.from_modes(out))


def ahlfors_beurling(f):
    """Beurling transform ``R f``, computed as the exact z-derivative of ``T f`` mode by mode."""
    grid = f.grid
    return ComplexField(grid, grid.from_modes(_r_modes(grid, _modes_of(f))))


def bergman(f):
    """Bergman-type projection carrying the sign of the ``dtau ^ dtau_bar`` kernel."""
    grid = f.grid
    return ComplexField(grid, grid.from_modes(_bergman_modes(grid, _modes_of(f))))


def t0(f):
    """``T0 f``: solves ``d/d conj(zeta) u = f`` with ``Re u = 0`` on the circle."""
    grid = f.grid
    out, exterior = _t_modes(grid, _modes_of(f))
    out = out - _reflection_modes(grid, exterior)
    return ComplexField(grid, grid.from_modes(out))


def r0(f):
    """``R0 f = R f + B conj(f)``."""
    grid = f.grid
    out = _r_modes(grid, _modes_of(f)) + _bergman_modes(grid, grid.to_modes(np.conj(f.values)))
    return ComplexField(grid, grid.from_modes(out))


OPERATORS = {
    "T": cauchy_green,
    "R": ahlfors_beurling,
    "B": bergman,
    "T0": t0,
    "R0": r0,
}


@dataclass(frozen=True)
class OperatorNormProfile:
    operator_id: str
    p: float
    estimate: float
    trials: int
    alpha: float = None

    def __post_init__(self):
        if self.alpha is None and self.p > 2:
            object.__setattr__(self, "alpha", (self.p - 2.0) / self.p)


def random_polynomial_field(grid, rng, degree=8):
    """Random polynomial in ``zeta, conj(zeta)`` of total degree <= ``degree``."""
    values = np.zeros(grid.shape, dtype=complex)
    z, zb = grid.zeta, np.conj(grid.zeta)
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            c = rng.normal() + 1j * rng.normal()
            values += c * z**a * zb**b
    return ComplexField(grid, values)


def estimate_norm(operator_id, p, trials=32, seed=0, grid=None, degree=8):
    """Seeded lower-bound estimate of the ``L^p -> L^p`` norm.

    Each trial draws a random polynomial probe and records
    ``||O f||_p / ||f||_p``; the estimate is the best ratio seen.
    """
    if operator_id not in OPERATORS:
        raise ConfigurationError(f"unknown operator {operator_id!r}")
    if not p > 1:
        raise ConfigurationError(f"exponent must exceed 1, got {p}")
    if trials < 1:
        raise ConfigurationError("need at least one trial")
    grid = grid or DiscGrid(32, 64)
    op = OPERATORS[operator_id]
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(trials):
        f = random_polynomial_field(grid, rng, degree=int(rng.integers(0, degree + 1)))
        nf = norm(f, p)
        if nf > 0:
            best = max(best, norm(op(f), p) / nf)
    return OperatorNormProfile(operator_id, float(p), best, trials)


def verify_identities(grid, seed=0, probes=8, degree=8):
    """Check the operator identities on seeded polynomial probes.

    Returns one record ``{identity, grid, max_error, tolerance, pass}`` per
    identity, each error maximized over all probes.
    """
    rng = np.random.default_rng(seed)
    fields = [random_polynomial_field(grid, rng, degree) for _ in range(probes)]
    interior = grid.radial_nodes < 1.0
    one = ComplexField(grid, np.ones(grid.shape, dtype=complex))

    def worst(fn):
        return max(float(fn(f)) for f in fields)

    checks = [
        ("dbar(T f) = f", 1e-6, worst(lambda f: np.abs((dbar(cauchy_green(f)) - f).values[interior]).max())),
        ("dz(T f) = R f", 1e-6, worst(lambda f: np.abs((dz(cauchy_green(f)) - ahlfors_beurling(f)).values).max())),
        ("dbar(T0 f) = f", 1e-6, worst(lambda f: np.abs((dbar(t0(f)) - f).values[interior]).max())),
        ("Re T0 f = 0 on the circle", 1e-8, worst(lambda f: np.abs(t0(f).boundary().values.real).max())),
        ("R0 f = dz(T0 f)", 1e-6, worst(lambda f: np.abs((r0(f) - dz(t0(f))).values).max())),
        ("||R0 f||_2 = ||f||_2", 1e-6, worst(lambda f: abs(norm(r0(f), 2) / norm(f, 2) - 1.0))),
        ("B f has no antiholomorphic energy", 1e-8, worst(lambda f: _antiholomorphic_share(bergman(f)))),
        ("T 1 = conj(zeta)", 1e-10, float(np.abs(cauchy_green(one).values - np.conj(grid.zeta)).max())),
        ("B 1 = -1", 1e-10, float(np.abs(bergman(one).values + 1.0).max())),
        ("R0 1 = -1", 1e-10, float(np.abs(r0(one).values + 1.0).max())),
    ]
    label = f"{grid.n_radial}x{grid.n_angular}"
    return [
        {"identity": name, "grid": label, "max_error": err, "tolerance": tol, "pass": bool(err <= tol)}
        for name, tol, err in checks
    ]


def _antiholomorphic_share(f):
    coeffs = f.grid.to_modes(f.values)
    energy = np.sum(f.grid.radial_weights[:, None] * np.abs(coeffs) ** 2)
    anti = np.sum(f.grid.radial_weights[:, None] * np.abs(coeffs[:, f.grid.modes < 0]) ** 2)
    return anti / energy if energy > 0 else 0.0
