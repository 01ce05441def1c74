"""Reference computations that share no code with the package.

Operators are evaluated by direct quadrature of their kernels on analytic
callables ``f(z)``; polar coordinates centred at the target point remove the
kernel singularity.
"""

import numpy as np

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(80)


def _ray_length(z0, phi):
    """Distance from ``z0`` (inside D) to the unit circle along direction ``phi``."""
    proj = np.real(np.conj(z0) * np.exp(1j * phi))
    return -proj + np.sqrt(proj**2 + 1 - abs(z0) ** 2)


def _rays(z0, n_phi):
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    L = _ray_length(z0, phi)
    s = 0.5 * (_GL_NODES + 1)
    rho = L[:, None] * s[None, :]
    w = 0.5 * L[:, None] * _GL_WEIGHTS[None, :]
    pts = z0 + rho * np.exp(1j * phi)[:, None]
    return phi, L, rho, w, pts


def cauchy_green_at(f, z0, n_phi=256):
    """``-(1/pi) int_D f(t) / (t - z0) dA(t)``."""
    phi, _, _, w, pts = _rays(z0, n_phi)
    inner = np.sum(w * f(pts), axis=1)
    return -np.sum(np.exp(-1j * phi) * inner) * (2 * np.pi / n_phi) / np.pi


def beurling_at(f, z0, n_phi=256):
    """Principal value ``-(1/pi) PV int_D f(t) / (t - z0)^2 dA(t)``."""
    phi, L, rho, w, pts = _rays(z0, n_phi)
    f0 = f(np.array(z0))
    inner = np.sum(w * (f(pts) - f0) / rho, axis=1) + f0 * np.log(L)
    return -np.sum(np.exp(-2j * phi) * inner) * (2 * np.pi / n_phi) / np.pi


def bergman_at(f, z, n_r=60, n_t=256):
    """``-(1/pi) int_D f(t) / (1 - conj(t) z)^2 dA(t)`` by polar quadrature about 0."""
    x, wx = np.polynomial.legendre.leggauss(n_r)
    r, wr = 0.5 * (x + 1), 0.5 * wx
    t = 2 * np.pi * np.arange(n_t) / n_t
    pts = r[:, None] * np.exp(1j * t)[None, :]
    kernel = f(pts) / (1 - np.conj(pts) * z) ** 2
    return -np.sum(wr[:, None] * r[:, None] * kernel) * (2 * np.pi / n_t) / np.pi


def area_integral(f, n_r=60, n_t=256):
    x, wx = np.polynomial.legendre.leggauss(n_r)
    r, wr = 0.5 * (x + 1), 0.5 * wx
    t = 2 * np.pi * np.arange(n_t) / n_t
    pts = r[:, None] * np.exp(1j * t)[None, :]
    return np.sum(wr[:, None] * r[:, None] * f(pts)) * (2 * np.pi / n_t)


def takagi_values(B):
    """Takagi values of a symmetric matrix are its singular values."""
    return np.linalg.svd(np.asarray(B), compute_uv=False)


def log_derivatives(phi, t, step=1e-4):
    """``t phi'(t)`` and ``t^2 phi''(t)`` by central differences in ``s = log t``.

    With ``g(s) = phi(e^s)``: ``t phi' = g'`` and ``t^2 phi'' = g'' - g'``.
    """
    s = np.log(t)
    gp, g0, gm = phi(np.exp(s + step)), phi(np.exp(s)), phi(np.exp(s - step))
    d1 = (gp - gm) / (2 * step)
    d2 = (gp - 2 * g0 + gm) / step**2
    return d1, d2 - d1


def disc_laplacian(u, p, v, J_is_standard=True, h=1e-3):
    """``Laplacian of u(p + zeta v)`` at ``zeta = 0`` (a J_st-holomorphic disc).

    ``v`` is a complex 2-vector; the disc is sampled in real coordinates.
    """
    assert J_is_standard

    def along(zeta):
        z = np.asarray(p, dtype=complex) + zeta * np.asarray(v, dtype=complex)
        return u(np.array([z[0].real, z[0].imag, z[1].real, z[1].imag]))

    return (along(h) + along(-h) + along(1j * h) + along(-1j * h) - 4 * along(0)) / h**2
