"""Critical points of plurisubharmonic Morse functions on C^2.

Points are real arrays ``(..., 4)`` ordered ``(x1, y1, x2, y2)`` unless a
function says it takes complex coordinates ``(..., 2)``.
"""

from dataclasses import dataclass, field

import numpy as np

from .acstructure import levi_eigenvalues_standard, to_complex, to_real
from .errors import ConfigurationError, ConstructionError, DegenerateMorseError, UsageError

__all__ = [
    "takagi",
    "QuadraticData",
    "MorseModel",
    "CutoffProfile",
    "CrossingProfile",
    "TotallyRealSet",
    "bump",
    "slow_cutoff",
    "morse_normal_form",
    "crossing_profile",
    "totally_real_E",
    "inclusion_check",
]


def _realify(M):
    """Real 4x4 matrix of ``v -> M v`` in ``(Re v1, Im v1, Re v2, Im v2)`` order."""
    out = np.empty((4, 4))
    for c in range(2):
        out[:, 2 * c] = to_real(M[:, c])
        out[:, 2 * c + 1] = to_real(1j * M[:, c])
    return out


def _takagi_vector(B):
    """Unit ``u`` with ``B(x, u) = lam * <x, u>`` for all ``x``, ``lam >= 0`` maximal.

    The antilinear map ``L u = conj(B u)`` is self-adjoint for the real inner
    product; its top eigenvector does the job.
    """
    n = B.shape[0]
    if n == 1:
        return np.ones(1, dtype=complex), abs(B[0, 0])
    conj = np.diag(np.tile([1.0, -1.0], n))
    L = np.empty((2 * n, 2 * n))
    Bc = np.conj(B)
    for c in range(n):
        e = np.zeros(n, dtype=complex)
        e[c] = 1.0
        L[:, 2 * c] = _interleave(Bc @ e)
        L[:, 2 * c + 1] = _interleave(Bc @ (1j * e))
    L = L @ conj
    vals, vecs = np.linalg.eigh(0.5 * (L + L.T))
    v = vecs[:, -1]
    return v[0::2] + 1j * v[1::2], max(vals[-1], 0.0)


def _interleave(v):
    out = np.empty(2 * len(v))
    out[0::2], out[1::2] = v.real, v.imag
    return out


def takagi(B, tol=1e-12):
    """Unitary ``U`` and ``d`` (descending, nonnegative) with ``U^T B U = diag(d)``.

    Vectors are peeled off one at a time: each is a top eigenvector of the
    antilinear map attached to ``B`` on the orthogonal complement of the
    previous ones, then rotated by a phase so its value is real.
    """
    B = np.asarray(B, dtype=complex)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise UsageError("takagi needs a square matrix")
    if np.abs(B - B.T).max() > tol:
        raise UsageError("matrix is not symmetric")
    n = B.shape[0]
    diag = np.diag(B)
    if np.all(B == np.diag(diag)) and np.all(diag.imag == 0) and np.all(diag.real >= 0):
        order = np.argsort(-diag.real, kind="stable")
        return np.eye(n, dtype=complex)[:, order], diag.real[order]
    basis = np.eye(n, dtype=complex)
    cols, diag = [], []
    for _ in range(n):
        sub = basis.T @ B @ basis
        u_sub, _ = _takagi_vector(sub)
        u = basis @ u_sub
        u /= np.linalg.norm(u)
        c = u @ B @ u
        if abs(c) > 0:
            u = u * np.exp(-0.5j * np.angle(c))
        cols.append(u)
        diag.append(float(np.real(u @ B @ u)))
        q, _ = np.linalg.qr(np.column_stack([np.column_stack(cols), np.eye(n)]))
        basis = q[:, len(cols) : n]
    U = np.column_stack(cols)
    d = np.maximum(np.array(diag), 0.0)
    order = np.argsort(-d, kind="stable")
    return U[:, order], d[order]


# -- cut-off functions -------------------------------------------------------


def _smoothstep(x):
    """C-infinity step from 0 (x <= 0) to 1 (x >= 1) with derivatives."""
    x = np.asarray(x, dtype=float)
    inside = (x > 0) & (x < 1)
    s = np.where(x >= 1, 1.0, 0.0)
    d1 = np.zeros_like(x)
    d2 = np.zeros_like(x)
    xi = x[inside]
    q = 1 / xi - 1 / (1 - xi)
    dq = -1 / xi**2 - 1 / (1 - xi) ** 2
    d2q = 2 / xi**3 - 2 / (1 - xi) ** 3
    with np.errstate(over="ignore"):
        sig = 1 / (1 + np.exp(q))
    ds = sig * (1 - sig)
    s[inside] = sig
    d1[inside] = -ds * dq
    d2[inside] = ds * (1 - 2 * sig) * dq**2 - ds * d2q
    return s, d1, d2


def bump(t):
    """Polynomial bump: 1 on ``[0, 1/2]``, 0 for ``t >= 1``, C^2 quintic in between."""
    t = np.asarray(t, dtype=float)
    x = np.clip(2 * t - 1, 0.0, 1.0)
    return 1 - x**3 * (10 - 15 * x + 6 * x**2)


@dataclass(frozen=True)
class CutoffProfile:
    """``phi(t) = psi(delta * log max(t, 1))`` with ``psi(s) = 1 - step(s / width)``.

    ``width = 5`` keeps ``|psi'| <= 0.4`` and ``|psi''| <= 0.4``, so
    ``|t phi'| <= delta`` and ``|t^2 phi''| <= delta`` hold for ``delta < 1``.
    """

    delta: float
    width: float = 5.0

    @property
    def support_end(self):
        return float(np.exp(self.width / self.delta))

    def _psi(self, s):
        step, d1, d2 = _smoothstep(np.asarray(s, dtype=float) / self.width)
        return 1 - step, -d1 / self.width, -d2 / self.width**2

    def of_log(self, log_t):
        """``phi`` as a function of ``log t``; safe far beyond float range of ``t``."""
        return self._psi(self.delta * np.maximum(log_t, 0.0))[0]

    def phi(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return self.of_log(np.log(np.maximum(t, 1e-300)))

    def derivatives(self, t):
        """``(phi, t phi', t^2 phi'')`` at ``t``."""
        t = np.asarray(t, dtype=float)
        log_t = np.log(np.maximum(t, 1.0))
        p0, p1, p2 = self._psi(self.delta * log_t)
        outside = t <= 1.0
        tphi1 = np.where(outside, 0.0, self.delta * p1)
        t2phi2 = np.where(outside, 0.0, self.delta**2 * p2 - self.delta * p1)
        return p0, tphi1, t2phi2

    def sampled_bounds(self, n=10_000):
        """Max of ``|t phi'|`` and ``|t^2 phi''|`` over ``n`` log-spaced points covering the support."""
        t = np.logspace(-3, np.log10(self.support_end) + 1, n)
        _, a, b = self.derivatives(t)
        return float(np.abs(a).max()), float(np.abs(b).max())


def slow_cutoff(delta):
    if not 0 < delta < 1:
        raise ConfigurationError(f"delta must lie in (0, 1), got {delta}")
    return CutoffProfile(float(delta))


# -- Morse normal form -------------------------------------------------------


def _monomials(z, i, j, k, l):  # noqa: E741
    z1, z2 = z[..., 0], z[..., 1]
    return z1**i * np.conj(z1) ** j * z2**k * np.conj(z2) ** l


@dataclass
class QuadraticData:
    """``rho(z) = rho0 + sum a_ij z_i conj(z_j) + Re sum b_ij z_i z_j + Re(cubic)``.

    ``cubic`` is a list of ``(c, (i, j, k, l))`` monomials of total degree 3
    modelling the remainder.
    """

    a: np.ndarray
    b: np.ndarray
    rho0: float = 0.0
    cubic: list = field(default_factory=list)

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=complex)
        self.b = np.asarray(self.b, dtype=complex)
        if self.a.shape != (2, 2) or self.b.shape != (2, 2):
            raise ConfigurationError("quadratic data must be 2x2")
        if np.abs(self.a - self.a.conj().T).max() > 1e-12:
            raise ConfigurationError("hermitian part is not hermitian")
        if np.abs(self.b - self.b.T).max() > 1e-12:
            raise ConfigurationError("symmetric part is not symmetric")
        if np.linalg.eigvalsh(self.a).min() <= 0:
            raise ConfigurationError("hermitian part must be positive definite")
        cubic = []
        for c, powers in self.cubic:
            if isinstance(c, (list, tuple)):
                c = complex(c[0], c[1])
            powers = tuple(int(p) for p in powers)
            if len(powers) != 4 or min(powers) < 0 or sum(powers) != 3:
                raise ConfigurationError(f"remainder monomial {powers} is not cubic")
            cubic.append((complex(c), powers))
        self.cubic = cubic

    def quadratic(self, z):
        z = np.asarray(z, dtype=complex)
        herm = np.einsum("...i,ij,...j->...", z, self.a, np.conj(z))
        sym = np.einsum("...i,ij,...j->...", z, self.b, z)
        return self.rho0 + herm.real + sym.real

    def remainder(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape[:-1])
        for c, powers in self.cubic:
            out = out + np.real(c * _monomials(z, *powers))
        return out

    def __call__(self, z):
        return self.quadratic(z) + self.remainder(z)


@dataclass
class MorseModel:
    """Modified function near a critical point, in the coordinates ``z = M eta``."""

    index: int
    coefficients: tuple
    eps: float
    data: QuadraticData
    change: np.ndarray
    unitary: np.ndarray
    takagi_values: np.ndarray
    cutoff: CutoffProfile

    @property
    def normal_radius(self):
        """Radius in ``eta`` below which the model is exactly the normal form."""
        return min(0.5, float(np.exp(-self.cutoff.width / self.cutoff.delta))) * self.eps

    def to_eta(self, z):
        return np.linalg.solve(self.change, np.asarray(z, dtype=complex)[..., None])[..., 0]

    def to_z(self, eta):
        return np.asarray(eta, dtype=complex) @ self.change.T

    def normal_form(self, eta):
        eta = np.asarray(eta, dtype=complex)
        a1, a2 = self.coefficients
        sq = np.abs(eta) ** 2
        return (
            self.data.rho0 + sq.sum(-1) - a1 * np.real(eta[..., 0] ** 2) - a2 * np.real(eta[..., 1] ** 2)
        )

    def evaluate_eta(self, eta):
        eta = np.asarray(eta, dtype=complex)
        z = self.to_z(eta)
        r = np.linalg.norm(eta, axis=-1)
        out = self.data(z) - self.data.remainder(z) * bump(r / self.eps)
        with np.errstate(divide="ignore"):
            log_r = np.log(np.maximum(r, 1e-300) / self.eps)
        # phi(T r / eps) with T the support end, so the support is r < eps
        lam = self.cutoff.of_log(log_r + self.cutoff.width / self.cutoff.delta)
        shift = sum(
            (d - c) * np.real(eta[..., j] ** 2)
            for j, (d, c) in enumerate(zip(self.takagi_values, self.coefficients))
        )
        return out + lam * shift

    def __call__(self, z):
        return self.evaluate_eta(self.to_eta(z))

    def real_function(self, space="eta"):
        """Scalar function of real 4-vectors for Levi and gradient checks."""
        f = self.evaluate_eta if space == "eta" else self.__call__
        return lambda x: f(to_complex(x))

    def to_dict(self):
        return {
            "index": self.index,
            "coefficients": list(self.coefficients),
            "eps": self.eps,
            "delta": self.cutoff.delta,
            "takagi_values": [float(v) for v in self.takagi_values],
            "change": [[[v.real, v.imag] for v in row] for row in self.change],
            "unitary": [[[v.real, v.imag] for v in row] for row in self.unitary],
        }


def morse_normal_form(q, k, eps=0.1, delta=0.05, gap=1e-6):
    """Modify ``q`` near 0 into the normal form of index ``k``.

    In coordinates ``z = M eta`` with ``M = P U (i I)`` the quadratic part reads
    ``|eta|^2 - sum d_j Re eta_j^2``. The cubic remainder is removed inside
    ``|eta| < eps`` with :func:`bump`, and each ``d_j`` is moved to 0 or 2
    through the slow cut-off rescaled so that its support ends at ``|eta| = eps``.
    """
    if k not in (0, 1, 2):
        raise ConfigurationError(f"index must be 0, 1 or 2, got {k}")
    # a = conj(L) L^T with L the Cholesky factor of conj(a); then P^T a conj(P) = I
    L = np.linalg.cholesky(np.conj(q.a))
    P = np.linalg.inv(np.conj(L)).T
    b1 = P.T @ q.b @ P
    U, d = takagi(0.5 * (b1 + b1.T))
    M = P @ U * 1j
    near = np.abs(d - 1.0) <= gap
    if near.any():
        raise DegenerateMorseError(f"normalized coefficient {d[near][0]:.9g} is too close to 1")
    found = int(np.sum(d > 1))
    if found != k:
        raise ConfigurationError(f"data has index {found}, not {k}")
    coeffs = tuple(2.0 if dj > 1 else 0.0 for dj in d)
    return MorseModel(k, coeffs, float(eps), q, M, U, d, slow_cutoff(delta))


# -- crossing a critical level ----------------------------------------------


@dataclass
class CrossingProfile:
    """Quadratic model of index ``k`` and its modification ``phi = model + g(x)``.

    ``x`` is the unstable radius: ``|Re z1|`` for ``k = 1`` and
    ``|(Re z1, Re z2)|`` for ``k = 2``.

    ``g(x) = x^2 - H(x)`` where ``H`` vanishes for ``x <= x0``, equals
    ``x^2 - tau1`` for ``x >= 1`` and is a C^2 quartic spline in between.
    """

    k: int
    x0: float
    beta: float
    tau0: float = None
    tau1: float = None
    min_levi: float = None

    def H(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        L = 1.0 - self.x0
        y = np.clip((x - self.x0) / L, 0.0, 1.0)
        mid = L**2 * (y**3 / 3 + self.beta * (y**3 / 6 - y**4 / 12))
        tail = x**2 - (1.0 - L**2 * (1 / 3 + self.beta / 12))
        return np.where(x >= 1.0, tail, mid)

    def unstable_radius(self, w):
        w = np.asarray(w, dtype=float)
        if self.k == 1:
            return np.abs(w[..., 0])
        return np.hypot(w[..., 0], w[..., 2])

    def quadratic_model(self, w):
        w = np.asarray(w, dtype=float)
        u1, v1, u2, v2 = np.moveaxis(w, -1, 0)
        if self.k == 1:
            return 3 * v1**2 + v2**2 - u1**2 + u2**2
        return 3 * v1**2 + 3 * v2**2 - u1**2 - u2**2

    def lift(self, w):
        x = self.unstable_radius(w)
        return x**2 - self.H(x)

    def phi(self, w):
        # closed form, so phi vanishes exactly on E where x <= x0
        w = np.asarray(w, dtype=float)
        u1, v1, u2, v2 = np.moveaxis(w, -1, 0)
        if self.k == 1:
            return 3 * v1**2 + v2**2 + u2**2 - self.H(u1)
        return 3 * v1**2 + 3 * v2**2 - self.H(np.hypot(u1, u2))

    def to_dict(self):
        return {"k": self.k, "x0": self.x0, "tau0": self.tau0, "tau1": self.tau1, "min_levi": self.min_levi}


def _sample_box(k, half_width, n, seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-half_width, half_width, size=(n, 4))
    # extra mass on the transition shell and on the level x = 1
    shell = rng.uniform(-half_width, half_width, size=(n // 4, 4))
    radius = rng.uniform(0.0, 1.2, size=n // 4)
    if k == 1:
        shell[:, 0] = radius * rng.choice([-1.0, 1.0], size=len(radius))
    else:
        ang = rng.uniform(0, 2 * np.pi, size=len(radius))
        shell[:, 0], shell[:, 2] = radius * np.cos(ang), radius * np.sin(ang)
    return np.vstack([pts, shell])


def crossing_profile(k, tau0=0.16, half_width=2.0, n_samples=4000, levi_samples=600, seed=0, slack=1e-9):
    """Build ``phi`` for index ``k`` and certify its properties on a sample box.

    Raises :class:`ConstructionError` naming the first property that fails.
    """
    if k not in (1, 2):
        raise ConfigurationError(f"crossing profile needs index 1 or 2, got {k}")
    if not 0 < tau0 < 1:
        raise ConfigurationError("tau0 must lie in (0, 1)")
    x0 = float(np.sqrt(tau0))
    # H'(1) = 2 fixes the bulge of the middle piece
    beta = 6 * (2 / (1 - x0) - 1)
    prof = CrossingProfile(k, x0, beta)

    s = np.linspace(0.0, 2.0, 20_001)
    g = np.sqrt(s) ** 2 - prof.H(np.sqrt(s))
    tail_min = np.minimum.accumulate(g[::-1])[::-1]
    ok = tail_min >= s - slack
    prof.tau0 = float(s[ok & (s > 0)].max()) if (ok & (s > 0)).any() else 0.0
    prof.tau1 = float(g[s >= 1.0].max())

    pts = _sample_box(k, half_width, n_samples, seed)
    diff = prof.phi(pts) - prof.quadratic_model(pts)
    up2 = prof.unstable_radius(pts) ** 2
    if diff.min() < -slack or diff.max() > prof.tau1 + slack:
        raise ConstructionError("sandwich bound model <= phi <= model + tau1 fails")
    if (diff[up2 >= prof.tau0] < prof.tau0 - slack).any():
        raise ConstructionError("lower gap phi >= model + tau0 fails where the unstable radius squared is >= tau0")
    if (np.abs(diff[up2 >= 1.0] - prof.tau1) > slack).any():
        raise ConstructionError("constant shift phi = model + tau1 fails where the unstable radius is >= 1")
    if not 0 < prof.tau0 < prof.tau1 < 1:
        raise ConstructionError(f"constants out of order: tau0={prof.tau0}, tau1={prof.tau1}")
    levi = levi_eigenvalues_standard(prof.phi, pts[:levi_samples])
    prof.min_levi = float(levi.min())
    if prof.min_levi <= 0:
        raise ConstructionError(f"strict plurisubharmonicity fails: min Levi eigenvalue {prof.min_levi:.3e}")
    return prof


@dataclass(frozen=True)
class TotallyRealSet:
    """``{y' = 0, z'' = 0, |x'|^2 <= c0}`` for index ``k``."""

    c0: float
    k: int

    def _split(self, x):
        x = np.asarray(x, dtype=float)
        x1, y1, x2, y2 = np.moveaxis(x, -1, 0)
        if self.k == 1:
            return np.abs(x1), np.stack([y1, x2, y2], axis=-1)
        return np.hypot(x1, x2), np.stack([y1, y2], axis=-1)

    def contains(self, x):
        radial, normal = self._split(x)
        return np.all(normal == 0.0, axis=-1) & (radial**2 <= self.c0)

    def distance(self, x):
        radial, normal = self._split(x)
        excess = np.maximum(radial - np.sqrt(self.c0), 0.0)
        return np.sqrt(np.sum(normal**2, axis=-1) + excess**2)


def totally_real_E(c0, k):
    if not c0 > 0:
        raise ConfigurationError("c0 must be positive")
    if k not in (1, 2):
        raise ConfigurationError("index must be 1 or 2")
    return TotallyRealSet(float(c0), k)


def inclusion_check(profile, n=20_000, seed=0, half_width=2.5):
    """Spot-check the sublevel inclusions for the model at ``c0 = 1``.

    With ``E`` of radius 1, returns counts of sample points violating

    * ``{quadratic_model <= -1} u E  in  {phi <= 0}  in  {quadratic_model <= -tau0} u E``,
    * ``{quadratic_model <= 1}  in  {phi <= 2}  in  {quadratic_model < 3}``.

    Points of ``E`` are added explicitly since random samples miss it.
    """
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-half_width, half_width, size=(n, 4))
    E = totally_real_E(1.0, profile.k)
    on_e = np.zeros((n // 10, 4))
    t = rng.uniform(-1, 1, size=n // 10)
    on_e[:, 0] = t
    if profile.k == 2:
        on_e[:, 2] = rng.uniform(-1, 1, size=n // 10) * np.sqrt(1 - t**2)
    pts = np.vstack([pts, on_e])
    rho, phi = profile.quadratic_model(pts), profile.phi(pts)
    in_e = E.contains(pts)
    below = phi <= 0
    counts = {
        "lower_left": int(np.sum(((rho <= -1) | in_e) & ~below)),
        "lower_right": int(np.sum(below & ~((rho <= -profile.tau0) | in_e))),
        "upper_left": int(np.sum((rho <= 1) & ~(phi <= 2))),
        "upper_right": int(np.sum((phi <= 2) & ~(rho < 3))),
    }
    return {"violations": counts, "passes": not any(counts.values()), "samples": len(pts)}
