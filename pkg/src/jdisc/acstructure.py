"""Almost complex structures on the bidisc in C^2.

Real coordinates are ordered ``(x1, y1, x2, y2)``; a complex vector
``(v1, v2)`` corresponds to ``(Re v1, Im v1, Re v2, Im v2)`` and the standard
structure ``J_ST`` is multiplication by ``i``. A structure is given as a
callable mapping points of shape ``(..., 4)`` to matrices ``(..., 4, 4)``.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from .beltrami import CoefficientPair, Term
from .errors import (
    ApproximationError,
    ConfigurationError,
    ConstructionError,
    DegeneracyError,
    EllipticityError,
)

__all__ = [
    "J2",
    "J_ST",
    "StructureField",
    "AMatrixField",
    "NormalizationMap",
    "project_structure",
    "standard_structure",
    "twisted_product_structure",
    "perturbed_structure",
    "structure_from_a",
    "sample_bidisc",
    "sample_structure",
    "matrix_a_from_j",
    "j_from_matrix_a",
    "verify_block_structure",
    "coefficients_from_structure",
    "nondegeneracy_check",
    "levi_matrix",
    "levi_form",
    "levi_form_report",
    "levi_eigenvalues_standard",
    "normalize_coordinates",
]

J2 = np.array([[0.0, -1.0], [1.0, 0.0]])
J_ST = np.kron(np.eye(2), J2)
_CONJ = np.diag([1.0, -1.0, 1.0, -1.0])


def to_real(v):
    v = np.asarray(v, dtype=complex)
    return np.stack([v[..., 0].real, v[..., 0].imag, v[..., 1].real, v[..., 1].imag], axis=-1)


def to_complex(x):
    x = np.asarray(x, dtype=float)
    return np.stack([x[..., 0] + 1j * x[..., 1], x[..., 2] + 1j * x[..., 3]], axis=-1)


def project_structure(J, tol=1e-14, max_steps=50):
    """Newton iteration ``J <- (J - J^{-1}) / 2`` onto ``{J^2 = -I}``."""
    J = np.array(J, dtype=float)
    eye = np.eye(J.shape[-1])
    for _ in range(max_steps):
        if np.abs(J @ J + eye).max() <= tol:
            return J
        J = 0.5 * (J - np.linalg.inv(J))
    if np.abs(J @ J + eye).max() > 1e-10:
        raise ConstructionError("projection onto J^2 = -I did not converge")
    return J


def standard_structure(x):
    x = np.asarray(x, dtype=float)
    return np.broadcast_to(J_ST, x.shape[:-1] + (4, 4)).copy()


def _blocks_to_j(j11, j21):
    shape = j11.shape[:-2]
    J = np.zeros(shape + (4, 4))
    J[..., :2, :2] = j11
    J[..., 2:, :2] = j21
    J[..., 2:, 2:] = J2
    return J


def twisted_product_structure(s=0.05):
    """Admissible structure: product structure twisted in ``w``.

    ``J11 = P J2 P^-1`` with ``P = I + s * [[Re w, Im w], [Im w, -Re w]]`` and
    ``J21 = X J11 - J2 X`` with ``X`` vanishing at ``w = 0``; ``J12 = 0`` and
    ``J22 = J2``. These choices make ``J^2 = -I`` hold identically.
    """

    def J(x):
        x = np.asarray(x, dtype=float)
        x1, y1, x2, y2 = np.moveaxis(x, -1, 0)
        P = np.empty(x.shape[:-1] + (2, 2))
        P[..., 0, 0] = 1 + s * x2
        P[..., 0, 1] = s * y2
        P[..., 1, 0] = s * y2
        P[..., 1, 1] = 1 - s * x2
        j11 = P @ J2 @ np.linalg.inv(P)
        X = np.empty_like(P)
        X[..., 0, 0] = s * (x2 + x1 * y2)
        X[..., 0, 1] = s * y2
        X[..., 1, 0] = s * y1 * x2
        X[..., 1, 1] = -s * x2
        return _blocks_to_j(j11, X @ j11 - J2 @ X)

    return J


def perturbed_structure(terms, eps=1.0):
    """``J_ST + eps * E(x)`` projected onto ``J^2 = -I``.

    ``terms`` is a list of ``(row, col, coefficient, (p1, q1, p2, q2))``
    contributing ``coefficient * x1^p1 y1^q1 x2^p2 y2^q2`` to ``E[row, col]``.
    """

    def J(x):
        x = np.asarray(x, dtype=float)
        E = np.zeros(x.shape[:-1] + (4, 4))
        for row, col, c, powers in terms:
            E[..., row, col] += c * np.prod(x ** np.asarray(powers, dtype=float), axis=-1)
        return project_structure(J_ST + eps * E)

    return J


def structure_from_a(A_func):
    """Structure whose Cauchy-Riemann matrix is ``A_func(z)`` (complex (..., 2, 2))."""

    def J(x):
        return j_from_matrix_a(A_func(to_complex(x)))

    return J


def sample_bidisc(gamma, n=2000, seed=0):
    """Points of ``closed D x (1+gamma) closed D`` including the faces ``w = 0`` and ``|.| = 1``."""
    rng = np.random.default_rng(seed)

    def disc(m, radius):
        rad = radius * np.sqrt(rng.uniform(size=m))
        return rad * np.exp(2j * np.pi * rng.uniform(size=m))

    z = disc(n, 1.0)
    w = disc(n, 1.0 + gamma)
    k = n // 8
    w[:k] = 0.0
    ang = 2 * np.pi * rng.uniform(size=(2, k))
    z[k : 2 * k] = np.exp(1j * ang[0])
    w[2 * k : 3 * k] = (1.0 + gamma) * np.exp(1j * ang[1])
    return to_real(np.stack([z, w], axis=-1))


@dataclass
class StructureField:
    """Structure matrices sampled at ``points`` (shape (N, 4)); ``func`` regenerates them."""

    points: np.ndarray
    J: np.ndarray
    func: object = None
    gamma: float = None

    def __post_init__(self):
        err = np.abs(self.J @ self.J + np.eye(4)).max()
        if err > 1e-10:
            raise ConstructionError(f"J^2 = -I violated by {err:.3e}")

    def block(self, i, j):
        return self.J[..., 2 * i : 2 * i + 2, 2 * j : 2 * j + 2]


def sample_structure(func, gamma=0.5, n=2000, seed=0):
    pts = sample_bidisc(gamma, n, seed)
    return StructureField(pts, func(pts), func, gamma)


@dataclass
class AMatrixField:
    points: np.ndarray
    A: np.ndarray


def _a_from_j(J):
    det = np.linalg.det(J_ST + J)
    bad = np.flatnonzero(np.abs(np.atleast_1d(det)) < 1e-12)
    if bad.size:
        raise DegeneracyError(f"J_st + J is singular at sample {int(bad[0])}")
    L = np.linalg.solve(J_ST + J, J_ST - J) @ _CONJ
    A = np.empty(J.shape[:-2] + (2, 2), dtype=complex)
    A[..., :, 0] = to_complex(L[..., :, 0])
    A[..., :, 1] = to_complex(L[..., :, 2])
    return A


def matrix_a_from_j(S):
    """``A v = (J_st + J)^-1 (J_st - J) conj(v)`` as a complex 2x2 matrix per sample."""
    return AMatrixField(S.points, _a_from_j(S.J))


def _real_matrix(A):
    """Real 4x4 form of the complex-linear map ``v -> A v``."""
    A = np.asarray(A, dtype=complex)
    M = np.empty(A.shape[:-2] + (4, 4))
    for jc in range(2):
        col_re = to_real(A[..., :, jc])
        col_im = to_real(1j * A[..., :, jc])
        M[..., :, 2 * jc] = col_re
        M[..., :, 2 * jc + 1] = col_im
    return M


def j_from_matrix_a(A):
    """Inverse of :func:`matrix_a_from_j`: ``J = J_st (I - M)(I + M)^-1`` with ``M = L conj``."""
    M = _real_matrix(A) @ _CONJ
    eye = np.eye(4)
    return J_ST @ (eye - M) @ np.linalg.inv(eye + M)


def verify_block_structure(S, tol=1e-8):
    """Deviations from ``J12 = 0``, ``J22 = J2``, ``J11(z,0) = J2``, ``J21(z,0) = 0``."""
    pts = S.points
    on_axis = np.hypot(pts[:, 2], pts[:, 3]) == 0.0
    if S.func is not None:
        base = pts.copy()
        base[:, 2:] = 0.0
        J0 = S.func(base)
    else:
        J0 = S.J[on_axis]
    dev = {
        "J12": float(np.abs(S.block(0, 1)).max()),
        "J22": float(np.abs(S.block(1, 1) - J2).max()),
        "J11_at_w0": float(np.abs(J0[..., :2, :2] - J2).max()) if len(J0) else 0.0,
        "J21_at_w0": float(np.abs(J0[..., 2:, :2]).max()) if len(J0) else 0.0,
    }
    failing = [k for k, v in dev.items() if v > tol]
    return {"deviations": dev, "failing": failing, "passes": not failing}


def _fit_basis(degree):
    out = []
    for i, j, k, l in product(range(degree + 1), repeat=4):  # noqa: E741
        if k + l >= 1 and i + j + k + l <= degree:
            out.append((i, j, k, l))
    return out


def _design(basis, z, w):
    zb, wb = np.conj(z), np.conj(w)
    return np.stack([z**i * zb**j * w**k * wb**l for i, j, k, l in basis], axis=1)  # noqa: E741


def coefficients_from_structure(S, gamma=None, degree=7, tol=1e-7):
    """Fit ``a = A11`` and ``b = A21`` by polynomials that all carry ``w`` or ``conj(w)``."""
    gamma = S.gamma if gamma is None else gamma
    report = verify_block_structure(S)
    if not report["passes"]:
        raise ConfigurationError(f"structure is not admissible: {report['failing']}")
    A = _a_from_j(S.J)
    a, b = A[:, 0, 0], A[:, 1, 0]
    if np.abs(a).max() >= 1:
        raise EllipticityError(f"|a| reaches {np.abs(a).max():.6g}")
    zw = to_complex(S.points)
    basis = _fit_basis(degree)
    X = _design(basis, zw[:, 0], zw[:, 1])
    terms = {}
    for name, target in (("a", a), ("b", b)):
        c, *_ = np.linalg.lstsq(X, target, rcond=None)
        err = np.abs(X @ c - target).max()
        if err > tol:
            raise ApproximationError(f"fit of {name} has sup residual {err:.3e} > {tol:g}")
        terms[name] = [Term(ck, *e) for ck, e in zip(c, basis) if abs(ck) > 1e-14]
    index = {e: col for col, e in enumerate(basis)}
    a_fit = sum((t.c * X[:, index[(t.i, t.j, t.k, t.l)]] for t in terms["a"]), np.zeros(len(a)))
    probe = CoefficientPair(terms["a"], terms["b"], gamma, a0=1 - 1e-12)
    a0 = max(probe.sampled_sup(), float(np.abs(a_fit).max()))
    if a0 >= 1:
        raise EllipticityError(f"fitted sup|a| = {a0:.6g}")
    return CoefficientPair(terms["a"], terms["b"], gamma, a0=a0)


def nondegeneracy_check(S):
    """Minimum of ``|det(J + J_st)|`` over the samples."""
    return float(np.abs(np.linalg.det(S.J + J_ST)).min())


def _gradient(u, x, h):
    E = h * np.eye(len(x))
    return (u(x + E) - u(x - E)) / (2 * h)


def levi_matrix(u, J, p, h=1e-4):
    """Symmetric ``S`` with ``L^J(u)(p)(v) = v^T S v``.

    ``L^J(u)(p)(v) = -d(J* du)(v, Jv)``; the one-form ``J* du`` has
    components ``alpha_j = sum_k du_k J_kj`` and its exterior derivative
    is taken by central differences.
    """
    p = np.asarray(p, dtype=float)
    n = len(p)

    def alpha(x):
        return np.asarray(J(x)).T @ _gradient(u, x, h)

    dal = np.array([(alpha(p + h * e) - alpha(p - h * e)) / (2 * h) for e in np.eye(n)])
    omega = dal - dal.T
    M = -omega @ np.asarray(J(p))
    return 0.5 * (M + M.T)


def levi_form(u, J, p, v, h=1e-4):
    v = np.asarray(v, dtype=float)
    return float(v @ levi_matrix(u, J, p, h) @ v)


def levi_form_report(u, J, p, v, h=1e-4, mismatch=1e-3):
    """Levi form at steps ``h`` and ``h/2``; ``reliable`` is False when they disagree by more than ``mismatch``."""
    coarse = levi_form(u, J, p, v, h)
    fine = levi_form(u, J, p, v, h / 2)
    return {"value": fine, "value_coarse": coarse, "reliable": abs(fine - coarse) <= mismatch}


def levi_eigenvalues_standard(u, points, h=1e-4):
    """Eigenvalues (ascending) of the ``J_ST`` Levi matrix ``H + J^T H J`` at many points.

    ``H`` is the central-difference Hessian; ``h`` may be a scalar or one
    step per point.
    """
    x = np.atleast_2d(np.asarray(points, dtype=float))
    h = np.broadcast_to(np.asarray(h, dtype=float), x.shape[:1])[:, None]
    E = np.eye(4)
    H = np.empty((len(x), 4, 4))
    u0 = u(x)
    for i in range(4):
        ei = h * E[i]
        H[:, i, i] = (u(x + ei) - 2 * u0 + u(x - ei)) / h[:, 0] ** 2
        for j in range(i + 1, 4):
            ej = h * E[j]
            mixed = u(x + ei + ej) - u(x + ei - ej) - u(x - ei + ej) + u(x - ei - ej)
            H[:, i, j] = H[:, j, i] = mixed / (4 * h[:, 0] ** 2)
    M = H + J_ST.T @ H @ J_ST
    return np.linalg.eigvalsh(M)


@dataclass
class NormalizationMap:
    """``z -> z + sum_kj a[k, j] z_k conj(z_j)``; ``a[k, j]`` is a vector in C^2."""

    a: np.ndarray
    residual_Az: float = None

    def apply(self, z):
        z = np.asarray(z, dtype=complex)
        out = z.copy()
        for k in range(2):
            for j in range(2):
                out = out + (z[..., k] * np.conj(z[..., j]))[..., None] * self.a[k, j]
        return out

    def real_jacobian(self, x):
        z = to_complex(x)
        D = np.empty((4, 4))
        for col, e in enumerate(np.eye(4)):
            d = to_complex(e)
            out = d.copy()
            for k in range(2):
                for j in range(2):
                    out = out + (d[k] * np.conj(z[j]) + z[k] * np.conj(d[j])) * self.a[k, j]
            D[:, col] = to_real(out)
        return D

    def inverse(self, y, steps=60):
        y = np.asarray(y, dtype=complex)
        z = y.copy()
        for _ in range(steps):
            z = y - (self.apply(z) - z)
        return z

    def pushforward(self, J):
        """Structure ``dPhi J dPhi^-1`` in the new coordinates."""

        def Jnew(y):
            y = np.asarray(y, dtype=float)
            flat = y.reshape(-1, 4)
            out = np.empty((len(flat), 4, 4))
            for idx, yy in enumerate(flat):
                x = to_real(self.inverse(to_complex(yy)))
                D = self.real_jacobian(x)
                out[idx] = D @ np.asarray(J(x)) @ np.linalg.inv(D)
            return out.reshape(y.shape[:-1] + (4, 4))

        return Jnew


def _a_z_at_origin(J, h):
    """``dA/dz_k (0) = (d/dx_k - i d/dy_k) A / 2`` by central differences."""
    out = []
    for k in range(2):
        ex, ey = np.zeros(4), np.zeros(4)
        ex[2 * k], ey[2 * k + 1] = h, h
        dx = (_a_from_j(np.asarray(J(ex))) - _a_from_j(np.asarray(J(-ex)))) / (2 * h)
        dy = (_a_from_j(np.asarray(J(ey))) - _a_from_j(np.asarray(J(-ey)))) / (2 * h)
        out.append(0.5 * (dx - 1j * dy))
    return out


def normalize_coordinates(J, h=1e-4, tol=1e-6):
    """Quadratic change of coordinates killing ``A_z(0)``.

    To first order the new matrix is ``A(z) + sum_k z_k [a_k1 a_k2]``, so the
    linear system ``A_k + [a_k1 a_k2] = 0`` has the unique solution
    ``a_kj = -(dA/dz_k)(0) e_j``. The result is re-extracted from the pushed
    structure and its residual stored in ``residual_Az``.
    """
    if isinstance(J, StructureField):
        if J.func is None:
            raise ConfigurationError("normalization needs a structure that can be evaluated off the samples")
        J = J.func
    origin = np.zeros(4)
    A0 = _a_from_j(np.asarray(J(origin)))
    if np.abs(A0).max() > 1e-9:
        raise ConfigurationError("coordinates are not centered: A(0) != 0")
    Ak = _a_z_at_origin(J, h)
    a = np.empty((2, 2, 2), dtype=complex)
    for k in range(2):
        for j in range(2):
            a[k, j] = -Ak[k][:, j]
    phi = NormalizationMap(a)
    check = _a_z_at_origin(phi.pushforward(J), h)
    phi.residual_Az = float(max(np.abs(c).max() for c in check))
    if phi.residual_Az > tol:
        raise ApproximationError(f"normalized A_z(0) = {phi.residual_Az:.3e} exceeds {tol:g}")
    return phi
