"""Discs solving the quasilinear Beltrami system with boundary on the torus.

We look for ``z = zeta e^u`` and ``w = zeta^n e^v`` solving

    dz/d(conj zeta) = a(z, w) conj(dz/dzeta)
    dw/d(conj zeta) = b(z, w) conj(dz/dzeta)

with ``|z| = |w| = 1`` on the circle. With ``h = du/d(conj zeta)``,
``u = T0 h`` and ``du/dzeta = R0 h``, so for fixed ``(u, v)`` the density
``h`` is the fixed point of ``h -> A (1 + conj(zeta) conj(R0 h))`` and the
pair is updated by ``(u, v) <- (T0 h, T0(B (1 + conj(zeta) conj(R0 h))))``.
"""

from dataclasses import dataclass, field as dc_field
import logging

import numpy as np

from .discfield import BoundaryTrace, ComplexField, DiscGrid, dbar, dz, norm
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DegenerateCurveError,
    InfeasibleExponentError,
)
from .transforms import estimate_norm, r0, t0

log = logging.getLogger(__name__)

__all__ = [
    "Term",
    "CoefficientPair",
    "SolverConfig",
    "DiscSolution",
    "SolveReport",
    "select_exponent",
    "solve_h",
    "outer_iterate",
    "residual",
    "winding_number",
    "jacobian_check",
    "envelope_constant",
    "torus_distance",
    "trivial_solution",
]


@dataclass(frozen=True)
class Term:
    """``c * z^i * conj(z)^j * w^k * conj(w)^l``."""

    c: complex
    i: int = 0
    j: int = 0
    k: int = 0
    l: int = 0  # noqa: E741

    def __post_init__(self):
        for name in "ijkl":
            e = getattr(self, name)
            if int(e) != e or e < 0:
                raise ConfigurationError(f"exponent {name}={e} must be a nonnegative integer")
        if self.k + self.l < 1:
            raise ConfigurationError("every term must carry w or conj(w) so that a(z,0) = b(z,0) = 0")
        object.__setattr__(self, "c", complex(self.c))

    @classmethod
    def from_dict(cls, d):
        c = d["c"]
        if isinstance(c, (list, tuple)):
            c = complex(c[0], c[1])
        return cls(c, int(d.get("i", 0)), int(d.get("j", 0)), int(d.get("k", 0)), int(d.get("l", 0)))

    def to_dict(self):
        return {"c": [self.c.real, self.c.imag], "i": self.i, "j": self.j, "k": self.k, "l": self.l}


def _evaluate(terms, z, w):
    z, w = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
    out = np.zeros(np.broadcast(z, w).shape, dtype=complex)
    for t in terms:
        out = out + t.c * z**t.i * np.conj(z) ** t.j * w**t.k * np.conj(w) ** t.l
    return out


def _bidisc_samples(gamma, n_r=9, n_t=16):
    rad = np.linspace(0.0, 1.0, n_r)
    ang = 2 * np.pi * np.arange(n_t) / n_t
    disc = (rad[:, None] * np.exp(1j * ang)[None, :]).ravel()
    z, w = np.meshgrid(disc, (1.0 + gamma) * disc, indexing="ij")
    return z.ravel(), w.ravel()


@dataclass(frozen=True)
class CoefficientPair:
    """Polynomial coefficients ``a, b`` of the system on ``D x (1+gamma) D``.

    ``a0`` is the declared bound for ``|a|``; when omitted it is taken as
    the sampled maximum.
    """

    a_terms: tuple
    b_terms: tuple
    gamma: float = 0.5
    a0: float = None

    def __post_init__(self):
        object.__setattr__(self, "a_terms", tuple(self.a_terms))
        object.__setattr__(self, "b_terms", tuple(self.b_terms))
        if not self.gamma > 0:
            raise ConfigurationError("gamma must be positive")
        sampled = self.sampled_sup()
        if self.a0 is None:
            object.__setattr__(self, "a0", sampled)
        if not self.a0 < 1:
            raise ConfigurationError(f"a0 = {self.a0} must be < 1")
        if sampled > self.a0 + 1e-9:
            raise ConfigurationError(f"sampled sup|a| = {sampled:.6g} exceeds declared a0 = {self.a0}")

    def sampled_sup(self):
        z, w = _bidisc_samples(self.gamma)
        return float(np.abs(_evaluate(self.a_terms, z, w)).max()) if self.a_terms else 0.0

    def a(self, z, w):
        return _evaluate(self.a_terms, z, w)

    def b(self, z, w):
        return _evaluate(self.b_terms, z, w)

    @classmethod
    def zero(cls, gamma=0.5):
        return cls((), (), gamma)

    def to_dict(self):
        return {
            "a_terms": [t.to_dict() for t in self.a_terms],
            "b_terms": [t.to_dict() for t in self.b_terms],
            "gamma": self.gamma,
            "a0": self.a0,
        }


@dataclass
class SolverConfig:
    n: int
    p: float = None
    p_candidates: tuple = (2.25, 2.5, 3.0, 4.0)
    n_radial: int = 64
    n_angular: int = 256
    tol_h: float = 1e-12
    tol_outer: float = 1e-10
    max_inner: int = 100
    max_outer: int = 200
    damping: float = 0.5
    safety: float = 1.05
    norm_trials: int = 32
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigurationError("vanishing order n must be a positive integer")
        if self.p is not None and not self.p > 2:
            raise ConfigurationError("working exponent must exceed 2")
        if not 0 < self.damping <= 1:
            raise ConfigurationError("damping must lie in (0, 1]")
        if self.max_inner < 1 or self.max_outer < 1:
            raise ConfigurationError("iteration caps must be positive")

    @property
    def grid(self):
        return DiscGrid(self.n_radial, self.n_angular)


@dataclass
class DiscSolution:
    u: ComplexField
    v: ComplexField
    h: ComplexField
    z: ComplexField
    w: ComplexField
    n: int

    @classmethod
    def assemble(cls, u, v, h, n):
        grid = u.grid
        zeta_n = grid.r**n * np.exp(1j * n * grid.theta)[None, :]
        z = ComplexField(grid, grid.zeta * np.exp(u.values))
        w = ComplexField(grid, zeta_n * np.exp(v.values))
        return cls(u, v, h, z, w, n)


@dataclass
class SolveReport:
    converged: bool
    outer_iters: int
    inner_iters_total: int
    p: float
    a0: float
    norm_estimate: float
    delta: float
    history: dict = dc_field(default_factory=dict)
    residuals: dict = dc_field(default_factory=dict)
    max_contraction_ratio: float = 0.0
    winding_z: int = None
    min_jacobian: float = None
    envelope_C: float = None
    sup_w: float = None
    torus_distance: float = None

    def to_dict(self):
        return {
            "converged": self.converged,
            "outer_iters": self.outer_iters,
            "inner_iters_total": self.inner_iters_total,
            "p": self.p,
            "a0": self.a0,
            "norm_estimate_R0": self.norm_estimate,
            "delta": self.delta,
            "history": self.history,
            "residuals": self.residuals,
            "max_contraction_ratio": self.max_contraction_ratio,
            "winding_z": self.winding_z,
            "min_jacobian": self.min_jacobian,
            "envelope_C": self.envelope_C,
            "sup_w": self.sup_w,
            "torus_distance": self.torus_distance,
        }


def select_exponent(coeffs, search, safety=1.05, trials=32, seed=0, grid=None):
    """Smallest ``p`` in ``search`` with ``a0 * safety * ||R0||_p < 1``."""
    search = sorted(search)
    if not search:
        raise ConfigurationError("empty exponent search list")
    if any(not p > 2 for p in search):
        raise ConfigurationError("candidate exponents must exceed 2")
    if coeffs.a0 == 0:
        return search[0]
    products = {}
    for p in search:
        est = estimate_norm("R0", p, trials=trials, seed=seed, grid=grid).estimate
        products[p] = coeffs.a0 * safety * est
        if products[p] < 1:
            return p
    raise InfeasibleExponentError(
        "no candidate exponent gives a contraction: "
        + ", ".join(f"p={p}: {v:.4f}" for p, v in products.items()),
        products,
    )


def _clamp_factor(abs_w, gamma):
    """``c(|w|) / |w|`` for a C^2 saturation ``c`` equal to the identity up to ``1 + gamma/2``."""
    t1 = 1.0 + 0.5 * gamma
    half = 0.5 * gamma
    out = np.ones_like(abs_w)
    big = abs_w > t1
    out[big] = (t1 + half * np.tanh((abs_w[big] - t1) / half)) / abs_w[big]
    return out


def _factored(terms, grid, u, v, n, shift, gamma):
    """``sum c z^i zb^j w^k wb^l * zeta^(-shift)`` with the zeta powers cancelled exactly."""
    r, th = grid.r, grid.theta[None, :]
    q = _clamp_factor(r**n * np.abs(np.exp(v)), gamma)
    ub, vb = np.conj(u), np.conj(v)
    out = np.zeros(grid.shape, dtype=complex)
    for t in terms:
        alpha = t.i + n * t.k - shift
        beta = t.j + n * t.l
        zeta_part = r ** (alpha + beta) * np.exp(1j * (alpha - beta) * th)
        out += t.c * zeta_part * np.exp(t.i * u + t.j * ub + t.k * v + t.l * vb) * q ** (t.k + t.l)
    return out


def _coefficient_fields(coeffs, grid, u, v, n):
    ub = np.conj(u)
    A = _factored(coeffs.a_terms, grid, u, v, n, 1, coeffs.gamma) * np.exp(ub - u)
    B = _factored(coeffs.b_terms, grid, u, v, n, n, coeffs.gamma) * np.exp(ub - v)
    return A, B


def _as_values(f):
    return f.values if isinstance(f, ComplexField) else np.asarray(f, dtype=complex)


def solve_h(u, v, coeffs, n, p, tol_h=1e-12, max_inner=100, h0=None, distances=None, grid=None):
    """Fixed point ``h = A (1 + conj(zeta) conj(R0 h))`` in ``L^p``.

    Returns ``(h, iterations)``. Successive ``L^p`` distances are appended
    to ``distances`` when a list is given.
    """
    grid = grid or u.grid
    A, _ = _coefficient_fields(coeffs, grid, _as_values(u), _as_values(v), n)
    return _inner_loop(grid, A, p, tol_h, max_inner, h0, distances)


def _inner_loop(grid, A, p, tol_h, max_inner, h0, distances):
    zbar = np.conj(grid.zeta)
    h = np.zeros(grid.shape, dtype=complex) if h0 is None else _as_values(h0)
    prev = ratio = None
    for it in range(1, max_inner + 1):
        rh = r0(ComplexField(grid, h)).values
        h_new = A * (1.0 + zbar * np.conj(rh))
        d = norm(ComplexField(grid, h_new - h), p)
        if distances is not None:
            distances.append(d)
        h = h_new
        if d < tol_h:
            return ComplexField(grid, h), it
        ratio = d / prev if prev else None
        prev = d
    raise ConvergenceError(
        f"inner iteration did not reach {tol_h:g} in {max_inner} steps", last_ratio=ratio
    )


def _contraction_ratios(distances, floor):
    ratios = []
    for a, b in zip(distances, distances[1:]):
        if a > floor and b > floor:
            ratios.append(b / a)
    return ratios


def outer_iterate(coeffs, config):
    """Damped Picard iteration for ``(u, v)``; returns ``(DiscSolution, SolveReport)``.

    Raises :class:`ConvergenceError` (with the full history attached) when
    ``max_outer`` is exhausted.
    """
    grid = config.grid
    n = config.n
    if config.p is None:
        p = select_exponent(coeffs, config.p_candidates, config.safety, config.norm_trials, config.seed, grid)
    else:
        p = config.p
    est = estimate_norm("R0", p, trials=config.norm_trials, seed=config.seed, grid=grid).estimate
    if coeffs.a0 * config.safety * est >= 1:
        raise InfeasibleExponentError(
            f"a0 * safety * ||R0||_{p} = {coeffs.a0 * config.safety * est:.4f} >= 1",
            {p: coeffs.a0 * config.safety * est},
        )

    zbar = np.conj(grid.zeta)
    u = np.zeros(grid.shape, dtype=complex)
    v = np.zeros(grid.shape, dtype=complex)
    h = None
    history = {"sup_u": [], "sup_v": [], "h_p": [], "update": []}
    inner_total = 0
    worst_ratio = 0.0
    converged = False
    for k in range(1, config.max_outer + 1):
        A, B = _coefficient_fields(coeffs, grid, u, v, n)
        distances = []
        h, its = _inner_loop(grid, A, p, config.tol_h, config.max_inner, h, distances)
        inner_total += its
        floor = 1e3 * np.finfo(float).eps * max(1.0, norm(h, p))
        ratios = _contraction_ratios(distances, floor)
        if ratios:
            worst_ratio = max(worst_ratio, max(ratios))
        rh = r0(h).values
        U = t0(h).values
        V = t0(ComplexField(grid, B * (1.0 + zbar * np.conj(rh)))).values
        update = max(np.abs(U - u).max(), np.abs(V - v).max())
        history["sup_u"].append(float(np.abs(U).max()))
        history["sup_v"].append(float(np.abs(V).max()))
        history["h_p"].append(norm(h, p))
        history["update"].append(float(update))
        log.debug("outer %d: update %.3e, |u| %.3e, |v| %.3e", k, update, history["sup_u"][-1], history["sup_v"][-1])
        if update < config.tol_outer:
            u, v = U, V
            converged = True
            break
        u = u + config.damping * (U - u)
        v = v + config.damping * (V - v)
    if not converged:
        raise ConvergenceError(
            f"outer iteration did not converge in {config.max_outer} steps "
            f"(last update {history['update'][-1]:.3e})",
            history=history,
        )

    sol = DiscSolution.assemble(ComplexField(grid, u), ComplexField(grid, v), h, n)
    report = SolveReport(
        converged=True,
        outer_iters=k,
        inner_iters_total=inner_total,
        p=float(p),
        a0=float(coeffs.a0),
        norm_estimate=float(est),
        delta=float(n ** (-1.0 / p)),
        history=history,
        max_contraction_ratio=float(worst_ratio),
    )
    report.residuals = residual(sol, coeffs)
    report.winding_z = winding_number(sol.z.boundary())
    report.min_jacobian, _ = jacobian_check(sol)
    report.envelope_C = envelope_constant(sol)
    report.sup_w = norm(sol.w, np.inf)
    report.torus_distance = torus_distance(sol)
    return sol, report


def trivial_solution(grid, n):
    zero = ComplexField(grid, np.zeros(grid.shape, dtype=complex))
    return DiscSolution.assemble(zero, zero, zero, n)


def residual(sol, coeffs):
    """Maxima of the two PDE residuals over interior rings and of the boundary deviations."""
    grid = sol.z.grid
    z, w = sol.z.values, sol.w.values
    q = _clamp_factor(np.abs(w), coeffs.gamma)
    wc = w * q
    dz_bar = np.conj(dz(sol.z).values)
    res_z = dbar(sol.z).values - coeffs.a(z, wc) * dz_bar
    res_w = dbar(sol.w).values - coeffs.b(z, wc) * dz_bar
    interior = grid.radial_nodes < 1.0
    bd_z = np.abs(np.abs(z[-1]) - 1.0).max()
    bd_w = np.abs(np.abs(w[-1]) - 1.0).max()
    return {
        "pde_z": float(np.abs(res_z[interior]).max()),
        "pde_w": float(np.abs(res_w[interior]).max()),
        "pde": float(max(np.abs(res_z[interior]).max(), np.abs(res_w[interior]).max())),
        "boundary_z": float(bd_z),
        "boundary_w": float(bd_w),
        "boundary": float(max(bd_z, bd_w)),
    }


def winding_number(tr):
    """Winding number about 0 of a closed sampled curve."""
    values = tr.values if isinstance(tr, BoundaryTrace) else np.asarray(tr, dtype=complex)
    if np.abs(values).min() <= 1e-12:
        raise DegenerateCurveError("boundary trace passes through the origin")
    steps = np.angle(np.roll(values, -1) / values)
    return int(np.rint(steps.sum() / (2 * np.pi)))


def jacobian_check(sol):
    """Minimum of ``|z_zeta|^2 - |z_zetabar|^2`` and whether it is positive everywhere."""
    z = sol.z if isinstance(sol, DiscSolution) else sol
    jac = np.abs(dz(z).values) ** 2 - np.abs(dbar(z).values) ** 2
    m = float(jac.min())
    return m, m > 0


def envelope_constant(sol):
    """Smallest ``C`` with ``|w| <= C |zeta|^n`` on the grid, i.e. ``max |e^v|``."""
    if sol.n < 1:
        raise ConfigurationError("n must be >= 1")
    return float(np.exp(sol.v.values.real).max())


def torus_distance(sol):
    z, w = sol.z.values[-1], sol.w.values[-1]
    return float(max(np.abs(np.abs(z) - 1).max(), np.abs(np.abs(w) - 1).max()))
