# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.

* ``green_re`` / ``green_im`` -- real and imaginary part of the two-particle
  k-integrand on a segment ``[a, b]`` in the endpoint-regularising variable
  ``k = a + (b - a)(1 - cos t)/2``, exported with the ``double (int, double *)`` signature so that
  :class:`scipy.LowLevelCallable` hands them straight to QUADPACK (no Python
  call per node).
* :func:`cn_propagate` -- Crank-Nicolson propagation of many orbitals on a
  ring with two time-dependent on-site potentials, accumulating the midpoint
  bond current.

The pure-Python twins live in :mod:`pairpump._fallback`; both must agree to
rounding.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef extern from *:
    """
    #include <complex.h>
    #include <math.h>
    static double pp_green_part(double k, double two_m, double zr, double zi, int part)
    {
        double complex w = 0.5 * (zr + I * zi) - cos(k);
        double complex lam = cacosh(w);
        if (creal(lam) < 0.0) lam = -lam;
        double complex f = cos(two_m * k) * cexp(-two_m * lam) / csinh(lam);
        return part ? cimag(f) : creal(f);
    }
    /* same integrand on [a, b] after k = a + (b - a)(1 - cos t)/2, t in [0, pi];
       the Jacobian cancels the inverse square roots at the segment ends */
    static double pp_green_mapped(double t, double two_m, double zr, double zi,
                                  double a, double b, int part)
    {
        double h = 0.5 * (b - a);
        return h * sin(t) * pp_green_part(a + h * (1.0 - cos(t)), two_m, zr, zi, part);
    }
    """
    double pp_green_part(double k, double two_m, double zr, double zi, int part) nogil
    double pp_green_mapped(double t, double two_m, double zr, double zi, double a, double b, int part) nogil


cdef api double green_re(int n, double *xx) noexcept nogil:
    # xx = (t, 2m, Re z, Im z, a, b): mapped variable t in [0, pi] for segment [a, b]
    return pp_green_mapped(xx[0], xx[1], xx[2], xx[3], xx[4], xx[5], 0)


cdef api double green_im(int n, double *xx) noexcept nogil:
    return pp_green_mapped(xx[0], xx[1], xx[2], xx[3], xx[4], xx[5], 1)


def green_integrand(double k, int m, double complex z):
    """Complex integrand at a single node (used in tests and benchmarks)."""
    return complex(pp_green_part(k, 2.0 * m, z.real, z.imag, 0),
                   pp_green_part(k, 2.0 * m, z.real, z.imag, 1))


def cn_propagate(double complex[:, ::1] psi, double[::1] onsite, Py_ssize_t site_minus,
                 Py_ssize_t site_plus, double[::1] v_minus, double[::1] v_plus, double dt,
                 Py_ssize_t bond):
    """Propagate the columns of ``psi`` in place on a periodic ring.

    Parameters
    ----------
    psi : complex ndarray, shape (N, M)
        Orbitals as columns; overwritten by the final state.
    onsite : ndarray, shape (N,)
        Static on-site energies (entries at the two impurity sites are ignored).
    site_minus, site_plus : int
        Ring indices of the two time-dependent potentials.
    v_minus, v_plus : ndarray, shape (nsteps,)
        Potentials at the midpoint of each step.
    dt : float
        Time step.
    bond : int
        Current is measured on the bond ``bond -> bond + 1`` (mod N).

    Returns
    -------
    float
        Charge transferred across the bond, summed over columns.
    """
    cdef Py_ssize_t N = psi.shape[0], M = psi.shape[1], nsteps = v_minus.shape[0]
    cdef Py_ssize_t n, j, c, b1 = (bond + 1) % N
    cdef double a = 0.5 * dt
    cdef double complex ia = 1j * a
    cdef double complex o = -ia            # off-diagonal of A = 1 + i a H (H_off = -1)
    cdef double complex gamma, vtq, og
    cdef double complex[::1] d = np.empty(N, dtype=np.complex128)
    cdef double complex[::1] dm = np.empty(N, dtype=np.complex128)
    cdef double complex[::1] inv = np.empty(N, dtype=np.complex128)
    cdef double complex[::1] cp = np.empty(N, dtype=np.complex128)
    cdef double complex[::1] q = np.empty(N, dtype=np.complex128)
    cdef double complex[:, ::1] cur = psi
    cdef double complex[:, ::1] nxt = np.empty((N, M), dtype=np.complex128)
    cdef double complex[:, ::1] tmp
    cdef double complex[::1] fcol = np.empty(M, dtype=np.complex128)
    cdef double[::1] v = np.array(onsite, dtype=np.float64)
    cdef double charge = 0.0, acc
    cdef double complex pm0, pm1
    if N < 3:
        raise ValueError("ring needs at least 3 sites")
    with nogil:
        for n in range(nsteps):
            v[site_minus] = v_minus[n]
            v[site_plus] = v_plus[n]
            for j in range(N):
                d[j] = 1.0 + ia * v[j]
                dm[j] = 1.0 - ia * v[j]
            # right-hand side (1 - i a H) psi, edge rows wrap around the ring
            for c in range(M):
                nxt[0, c] = dm[0] * cur[0, c] + ia * (cur[N - 1, c] + cur[1, c])
                nxt[N - 1, c] = dm[N - 1] * cur[N - 1, c] + ia * (cur[N - 2, c] + cur[0, c])
            for j in range(1, N - 1):
                for c in range(M):
                    nxt[j, c] = dm[j] * cur[j, c] + ia * (cur[j - 1, c] + cur[j + 1, c])
            # Sherman-Morrison split of the cyclic matrix: A = B + u v^T
            gamma = -d[0]
            og = o / gamma
            d[0] = d[0] - gamma
            d[N - 1] = d[N - 1] - o * og
            # Thomas factorisation of B (constant off-diagonal o)
            inv[0] = 1.0 / d[0]
            cp[0] = o * inv[0]
            for j in range(1, N):
                inv[j] = 1.0 / (d[j] - o * cp[j - 1])
                cp[j] = o * inv[j]
            # q = B^{-1} u, u = (gamma, 0, ..., 0, o)
            q[0] = gamma * inv[0]
            for j in range(1, N - 1):
                q[j] = -o * q[j - 1] * inv[j]
            q[N - 1] = (o - o * q[N - 2]) * inv[N - 1]
            for j in range(N - 2, -1, -1):
                q[j] = q[j] - cp[j] * q[j + 1]
            vtq = q[0] + og * q[N - 1]
            # y = B^{-1} rhs for all columns (in place)
            for c in range(M):
                nxt[0, c] = nxt[0, c] * inv[0]
            for j in range(1, N):
                for c in range(M):
                    nxt[j, c] = (nxt[j, c] - o * nxt[j - 1, c]) * inv[j]
            for j in range(N - 2, -1, -1):
                for c in range(M):
                    nxt[j, c] = nxt[j, c] - cp[j] * nxt[j + 1, c]
            # Sherman-Morrison correction, row-major with per-column factors
            for c in range(M):
                fcol[c] = (nxt[0, c] + og * nxt[N - 1, c]) / (1.0 + vtq)
            for j in range(N):
                for c in range(M):
                    nxt[j, c] = nxt[j, c] - q[j] * fcol[c]
            # midpoint bond current
            acc = 0.0
            for c in range(M):
                pm0 = 0.5 * (cur[bond, c] + nxt[bond, c])
                pm1 = 0.5 * (cur[b1, c] + nxt[b1, c])
                acc = acc - 2.0 * (pm1.real * pm0.imag - pm1.imag * pm0.real)
            charge = charge + dt * acc
            tmp = cur
            cur = nxt
            nxt = tmp
    if nsteps % 2 == 1:
        psi[:, :] = cur
    return charge
