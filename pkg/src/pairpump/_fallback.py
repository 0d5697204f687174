"""Pure-Python/numpy twins of the compiled kernels in ``_core.pyx``.

Selected automatically when the extension is not built (or when the
environment variable ``PAIRPUMP_BACKEND=python`` is set).
"""
import numpy as np
from scipy.linalg import solve_banded


def _green(k, two_m, zr, zi):
    lam = np.arccosh(0.5 * complex(zr, zi) - np.cos(k))
    if lam.real < 0.0:
        lam = -lam
    return np.cos(two_m * k) * np.exp(-two_m * lam) / np.sinh(lam)


def _mapped(t, two_m, zr, zi, a, b):
    h = 0.5 * (b - a)
    return h * np.sin(t) * _green(a + h * (1.0 - np.cos(t)), two_m, zr, zi)


def green_re(t, two_m, zr, zi, a, b):
    """Real part of the mapped segment integrand; arguments as in the compiled version."""
    return _mapped(t, two_m, zr, zi, a, b).real


def green_im(t, two_m, zr, zi, a, b):
    """Imaginary part of the mapped segment integrand."""
    return _mapped(t, two_m, zr, zi, a, b).imag


def green_integrand(k, m, z):
    """Complex integrand at a single node."""
    return complex(_green(k, 2.0 * m, z.real, z.imag))


def cn_propagate(psi, onsite, site_minus, site_plus, v_minus, v_plus, dt, bond):
    """Crank-Nicolson ring propagation; same contract as ``_core.cn_propagate``.

    Uses LAPACK banded solves for the tridiagonal part and a Sherman-Morrison
    correction for the two corner elements of the periodic ring.
    """
    N, M = psi.shape
    if N < 3:
        raise ValueError("ring needs at least 3 sites")
    a = 0.5 * dt
    o = -1j * a
    b1 = (bond + 1) % N
    v = np.array(onsite, dtype=float)
    ab = np.zeros((3, N), dtype=complex)
    ab[0, 1:] = o
    ab[2, :-1] = o
    rhs = np.empty((N, M + 1), dtype=complex)
    charge = 0.0
    for n in range(len(v_minus)):
        v[site_minus] = v_minus[n]
        v[site_plus] = v_plus[n]
        d = 1.0 + 1j * a * v
        gamma = -d[0]
        ab[1] = d
        ab[1, 0] -= gamma
        ab[1, -1] -= o * o / gamma
        rhs[:, :M] = (1.0 - 1j * a * v)[:, None] * psi + 1j * a * (np.roll(psi, 1, axis=0) + np.roll(psi, -1, axis=0))
        rhs[:, M] = 0.0
        rhs[0, M] = gamma
        rhs[-1, M] = o
        sol = solve_banded((1, 1), ab, rhs, check_finite=False)
        y, q = sol[:, :M], sol[:, M]
        vty = y[0] + (o / gamma) * y[-1]
        vtq = q[0] + (o / gamma) * q[-1]
        new = y - np.outer(q, vty / (1.0 + vtq))
        pm0 = 0.5 * (psi[bond] + new[bond])
        pm1 = 0.5 * (psi[b1] + new[b1])
        charge += dt * float(np.sum(-2.0 * np.imag(np.conj(pm1) * pm0)))
        psi[...] = new
    return charge
