r"""Brute-force validators that share no numerics with the quadrature pipeline.

* :func:`resolvent_element` -- sparse direct solve of :math:`(z - H)x = e_{col}`
  in the symmetric or antisymmetric two-particle sector of a finite chain.
* :func:`oracle_t_matrix` -- single-impurity T-matrix extracted from
  :math:`G = G_0 + G_0 T G_0` on the finite lattice.
* :func:`triplet_exclusion_check` -- the antisymmetric sector does not see
  on-site interactions.
* :func:`brouwer_pumped_charge` -- one-body pump from the parametric
  derivatives of the 2x2 scattering matrix (area integral).
* :func:`slater_sea_evolution` -- Crank-Nicolson evolution of a filled
  one-body Fermi sea on a ring under the time-dependent turnstile.

Finite lattices and broadening
------------------------------
A finite chain reproduces the infinite-chain resolvent only if a wave leaving
the centre never returns coherently.  With open or periodic boundaries that
needs :math:`N \gg v/\eta`, i.e. several thousand sites at
:math:`\eta = 10^{-3}`.  The ``absorbing`` boundary adds a smooth
complex absorbing potential :math:`-iW(x)`, with
:math:`W = W_0((w - x)/w)^p` over the outer ``w`` sites at each end.  The
defaults are ``w = 0.3 N``, ``p = 4`` and :math:`W_0 = 0.4 \cdot 400/N`.
This makes N = 400 accurate to :math:`\sim 10^{-5}` away from the van Hove
point :math:`E = 0`.  The advanced resolvent uses :math:`+iW`, so
:math:`G(\bar z) = \overline{G(z)}` holds exactly.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla
from scipy.integrate import dblquad

from . import _backend
from .errors import BandEdgeError, NormDriftError, ResonanceError
from .impurity import ImpurityState
from .lattice_green import ComplexEnergy
from .pump import CycleSchedule, PumpCycle

__all__ = [
    "FiniteLattice", "TwoParticleBasis", "sector_hamiltonian", "resolvent_element", "resolvent_elements",
    "oracle_t_matrix", "triplet_exclusion_check", "scattering_matrix", "brouwer_pumped_charge",
    "slater_sea_evolution", "SlaterRun", "default_oracle_eta",
]


def default_oracle_eta(n_sites):
    """Broadening that exceeds the finite-lattice level spacing, ``max(1e-3, 20/N^2)``."""
    return max(1e-3, 20.0 / n_sites ** 2)


@dataclass(frozen=True)
class FiniteLattice:
    """Finite chain of ``n_sites``; physical site ``n`` has index ``n + n_sites // 2``.

    Parameters
    ----------
    n_sites : int
    boundary : {'open', 'periodic', 'absorbing'}
    cap_width, cap_strength, cap_power : optional
        Absorbing-layer profile (defaults documented in the module docstring).
    """

    n_sites: int
    boundary: str = "open"
    cap_width: int | None = None
    cap_strength: float | None = None
    cap_power: int = 4

    def __post_init__(self):
        if self.n_sites < 4:
            raise ValueError("need at least 4 sites")
        if self.boundary not in ("open", "periodic", "absorbing"):
            raise ValueError("boundary must be 'open', 'periodic' or 'absorbing'")

    @property
    def center(self):
        return self.n_sites // 2

    def index(self, n):
        i = int(n) + self.center
        if not 0 <= i < self.n_sites:
            raise IndexError(f"site {n} outside the lattice")
        return i

    def require_room(self, m):
        """Enforce ``n_sites >= 4m + 20`` so impurities stay away from the boundary."""
        if self.n_sites < 4 * m + 20:
            raise ValueError(f"n_sites={self.n_sites} too small for m={m} (need >= {4 * m + 20})")

    def absorber(self):
        """Absorbing-potential profile W (zeros unless boundary='absorbing')."""
        N = self.n_sites
        w = np.zeros(N)
        if self.boundary != "absorbing":
            return w
        width = self.cap_width if self.cap_width is not None else int(round(0.3 * N))
        strength = self.cap_strength if self.cap_strength is not None else 0.4 * 400.0 / N
        x = np.arange(width)
        prof = strength * ((width - x) / width) ** self.cap_power
        w[:width] += prof
        w[N - width:] += prof[::-1]
        return w

    def one_body(self, advanced=False):
        """Sparse one-particle Hamiltonian (hopping -1, zero on-site, optional absorber)."""
        N = self.n_sites
        off = -np.ones(N - 1)
        h = sps.diags([off, off], [-1, 1], shape=(N, N), format="lil", dtype=complex)
        if self.boundary == "periodic":
            h[0, N - 1] = -1.0
            h[N - 1, 0] = -1.0
        w = self.absorber()
        if w.any():
            h.setdiag((1j if advanced else -1j) * w)
        return h.tocsr()


class TwoParticleBasis:
    """Ordered site pairs of one exchange sector.

    ``sector='symmetric'`` (spatial part of the singlet): pairs ``n1 <= n2``,
    dimension ``N(N+1)/2``.  ``sector='antisymmetric'`` (triplets): ``n1 < n2``,
    dimension ``N(N-1)/2``.  States are normalised (anti)symmetrised products.
    """

    def __init__(self, lattice: FiniteLattice, sector="symmetric"):
        if sector not in ("symmetric", "antisymmetric"):
            raise ValueError("sector must be 'symmetric' or 'antisymmetric'")
        self.lattice, self.sector = lattice, sector
        N = lattice.n_sites
        i1, i2 = np.triu_indices(N, k=0 if sector == "symmetric" else 1)
        self.n1, self.n2 = i1, i2
        self.dim = i1.size
        self._lookup = -np.ones((N, N), dtype=np.int64)
        self._lookup[i1, i2] = np.arange(self.dim)

    def state(self, pair):
        """Basis index of the physical site pair ``(n1, n2)`` (order irrelevant)."""
        a, b = sorted(self.lattice.index(n) for n in pair)
        k = self._lookup[a, b]
        if k < 0:
            raise KeyError(f"pair {pair} not in the {self.sector} sector")
        return int(k)

    def isometry(self):
        """Sparse ``N^2 x dim`` map from the sector into the product space."""
        N = self.lattice.n_sites
        cols = np.arange(self.dim)
        diag = self.n1 == self.n2
        off = ~diag
        sign = 1.0 if self.sector == "symmetric" else -1.0
        rows = np.concatenate([self.n1[diag] * N + self.n1[diag], self.n1[off] * N + self.n2[off],
                               self.n2[off] * N + self.n1[off]])
        cc = np.concatenate([cols[diag], cols[off], cols[off]])
        vals = np.concatenate([np.ones(diag.sum()), np.full(off.sum(), 1 / math.sqrt(2)),
                               np.full(off.sum(), sign / math.sqrt(2))])
        return sps.csr_matrix((vals, (rows, cc)), shape=(N * N, self.dim))


def sector_hamiltonian(basis: TwoParticleBasis, interactions: ImpurityState | None = None, m=1,
                       advanced=False, sites=None):
    r"""Two-particle Hamiltonian projected on the basis sector.

    The product-space operator :math:`h\otimes 1 + 1\otimes h + \sum_s U_s |s,s\rangle\langle s,s|`
    is built first and then projected with the sector isometry, so
    interactions enter every sector through the same code path.

    Parameters
    ----------
    interactions : ImpurityState, optional
        ``u_minus`` at site ``-m``, ``u_plus`` at ``+m``.
    sites : dict, optional
        Explicit ``{physical_site: U}`` map (overrides ``interactions``).
    """
    lat = basis.lattice
    N = lat.n_sites
    h = lat.one_body(advanced)
    eye = sps.identity(N, format="csr")
    Hp = (sps.kron(h, eye) + sps.kron(eye, h)).tocsr()
    if sites is None:
        sites = {}
        if interactions is not None:
            lat.require_room(m)
            sites = {-m: interactions.u_minus, m: interactions.u_plus}
    if any(u != 0 for u in sites.values()):
        diag = np.zeros(N * N, dtype=complex)
        for n, u in sites.items():
            i = lat.index(n)
            diag[i * N + i] += u
        Hp = Hp + sps.diags(diag, format="csr")
    S = basis.isometry()
    return (S.T @ Hp @ S).tocsc()


def _as_complex_energy(E, lattice):
    if isinstance(E, ComplexEnergy):
        return E.z
    z = complex(E)
    if z.imag == 0.0:
        z = complex(z.real, default_oracle_eta(lattice.n_sites))
    return z


def resolvent_elements(lattice: FiniteLattice, basis: TwoParticleBasis, interactions, E, rows, col, m=1,
                       sites=None):
    """Several elements ``<row|(z - H)^{-1}|col>`` from one sparse LU solve.

    Parameters
    ----------
    rows : sequence of (int, int)
        Physical site pairs.
    col : (int, int)
        Physical site pair of the source.
    E : ComplexEnergy or complex or float
        ``Im z < 0`` gives the advanced resolvent; a real value uses
        :func:`default_oracle_eta`.
    """
    z = _as_complex_energy(E, lattice)
    if abs(z.imag) < 1e-4:
        raise ValueError("finite-lattice resolvents need |eta| >= 1e-4 (level spacing)")
    H = sector_hamiltonian(basis, interactions, m, advanced=z.imag < 0, sites=sites)
    A = (z * sps.identity(basis.dim, format="csc", dtype=complex) - H).tocsc()
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:  # exactly singular
        raise ResonanceError(f"singular resolvent at z={z}; increase eta ({exc})") from None
    rhs = np.zeros(basis.dim, dtype=complex)
    rhs[basis.state(col)] = 1.0
    x = lu.solve(rhs)
    return np.array([x[basis.state(r)] for r in rows])


def resolvent_element(lattice: FiniteLattice, basis: TwoParticleBasis, interactions, E, row, col, m=1):
    """Single resolvent element; see :func:`resolvent_elements`."""
    return complex(resolvent_elements(lattice, basis, interactions, E, [row], col, m)[0])


def oracle_t_matrix(u, E, lattice: FiniteLattice):
    """T-matrix of one Hubbard impurity at the lattice centre, extracted from two solves.

    Returns
    -------
    t : complex
        ``(G - G0) / G0^2`` at the impurity pair state.
    g0 : complex
        Finite-lattice free on-site element.
    """
    basis = TwoParticleBasis(lattice, "symmetric")
    g0 = resolvent_elements(lattice, basis, None, E, [(0, 0)], (0, 0), sites={})[0]
    g = resolvent_elements(lattice, basis, None, E, [(0, 0)], (0, 0), sites={0: u})[0]
    return complex((g - g0) / g0 ** 2), complex(g0)


def triplet_exclusion_check(lattice: FiniteLattice, interactions=ImpurityState(5.0, 3.0), m=1,
                            sector="antisymmetric"):
    """True iff the sector Hamiltonian is entry-for-entry identical for U=(0,0) and ``interactions``."""
    basis = TwoParticleBasis(lattice, sector)
    H0 = sector_hamiltonian(basis, ImpurityState(0.0, 0.0), m)
    H1 = sector_hamiltonian(basis, interactions, m)
    if H0.shape != H1.shape:
        return False
    return (H0 != H1).nnz == 0


# ----------------------------------------------------------------------------
# one-body scattering matrix and Brouwer formula
# ----------------------------------------------------------------------------
def _k_of(E):
    if not abs(E) < 2.0 - 1e-3:
        raise BandEdgeError(f"energy {E} outside or within 1e-3 of the one-particle band edge")
    return math.acos(-0.5 * E)


def scattering_matrix(v_minus, v_plus, m, E):
    r"""2x2 scattering matrix of potentials ``v_minus`` at ``-m`` and ``v_plus`` at ``+m``.

    Channels are ordered (left, right); waves are :math:`e^{\pm ikn}` with
    :math:`E = -2\cos k`.  Obtained by propagating the two left-lead plane
    waves through :math:`\psi_{n+1} = (v_n - E)\psi_n - \psi_{n-1}`.
    """
    k = _k_of(E)
    e = np.exp(1j * k)

    def propagate(sgn):
        prev, cur = e ** (sgn * (-m - 1)), e ** (sgn * (-m))
        for n in range(-m, m + 1):
            v = v_minus if n == -m else v_plus if n == m else 0.0
            prev, cur = cur, (v - E) * cur - prev
        # (prev, cur) = (psi(m), psi(m+1)) = B_out e^{ikn} + B_in e^{-ikn}
        a = np.array([[e ** m, e ** (-m)], [e ** (m + 1), e ** (-m - 1)]])
        return np.linalg.solve(a, np.array([prev, cur]))

    M = np.column_stack([propagate(+1), propagate(-1)])  # (b_out, b_in) = M (a_in, a_out)
    m11, m12, m21, m22 = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
    return np.array([[-m21 / m22, 1.0 / m22], [m11 - m12 * m21 / m22, m12 / m22]])


def _dS(vm, vp, m, E, which, h=1e-3):
    def S(x):
        return scattering_matrix(x, vp, m, E) if which == 0 else scattering_matrix(vm, x, m, E)
    x = vm if which == 0 else vp
    return (-S(x + 2 * h) + 8 * S(x + h) - 8 * S(x - h) + S(x - 2 * h)) / (12 * h)


def brouwer_pumped_charge(cycle: PumpCycle, m, fermi, epsabs=1e-10, epsrel=1e-8):
    r"""Charge pumped into the right lead per cycle from the Brouwer area integral.

    .. math::

        Q_R = -\frac{1}{\pi} \iint_{\text{ccw}} dv_-\,dv_+ \sum_\beta
            \operatorname{Im}\left(\partial_{v_-} S^*_{R\beta}\,\partial_{v_+} S_{R\beta}\right)

    The enclosed area is fan-triangulated from the first vertex with signed
    triangle areas, so clockwise cycles and degenerate cycles are handled.
    """
    _k_of(fermi)

    def pi_density(vm, vp):
        d1 = _dS(vm, vp, m, fermi, 0)
        d2 = _dS(vm, vp, m, fermi, 1)
        return float(np.sum(np.imag(np.conj(d1[1]) * d2[1])))

    pts = [np.array(v) for v in cycle.vertices[:-1]]
    total = 0.0
    for i in range(1, len(pts) - 1):
        p0, e1, e2 = pts[0], pts[i] - pts[0], pts[i + 1] - pts[0]
        jac = e1[0] * e2[1] - e1[1] * e2[0]
        if jac == 0.0:
            continue
        val = dblquad(lambda t, s: pi_density(*(p0 + s * e1 + t * e2)), 0.0, 1.0, 0.0, lambda s: 1.0 - s,
                      epsabs=epsabs, epsrel=epsrel)[0]
        total += jac * val
    return -total / math.pi + 0.0


# ----------------------------------------------------------------------------
# Slater-sea evolution on a ring
# ----------------------------------------------------------------------------
@dataclass
class SlaterRun:
    """Outcome of :func:`slater_sea_evolution` (``charge`` is the transferred charge)."""

    charge: float
    n_occupied: int
    tau: float
    dt: float
    steps: int
    norm_drift: float
    refinements: list
    converged: bool = True


def _ring_run(lattice, cycle, m, tau, steps, occupied, impl):
    N = lattice.n_sites
    c = lattice.center
    sm, sp = c - m, c + m
    bond = (c + N // 2) % N
    dt = tau / steps
    sched = CycleSchedule.from_cycle(PumpCycle(cycle.vertices, tau))
    tmid = (np.arange(steps) + 0.5) * dt
    vv = np.array([sched.u(t) for t in tmid])
    psi = np.ascontiguousarray(occupied, dtype=complex)
    charge = _backend.cn_propagate(psi, np.zeros(N), sm, sp, np.ascontiguousarray(vv[:, 0]),
                                   np.ascontiguousarray(vv[:, 1]), dt, bond, impl=impl)
    drift = float(np.max(np.abs(np.linalg.norm(psi, axis=0) - 1.0))) if psi.size else 0.0
    return charge, drift


def slater_sea_evolution(lattice: FiniteLattice, cycle: PumpCycle, fermi, m=1, tau=None, ratio=1e4, steps=None,
                         dt0=0.5, step_tol=1e-4, max_refinements=4, impl=None, return_details=False):
    """Charge carried through the ring by the filled one-body sea over one period.

    Every orbital of the instantaneous Hamiltonian at ``t = 0`` with energy
    below ``fermi`` is propagated with Crank-Nicolson (implicit midpoint, norm
    preserving) through one traversal of ``cycle`` at uniform speed per leg.
    The midpoint current through the bond antipodal to the impurities is
    accumulated in the left-to-right direction.  The discrete continuity
    equation of the midpoint scheme makes this charge count exact.

    Parameters
    ----------
    lattice : FiniteLattice
        Must be periodic.
    cycle : PumpCycle
        Path in the ``(v_minus, v_plus)`` plane; a single repeated vertex is static.
    fermi : float
        Fermi level.
    tau : float, optional
        Period; default ``ratio * (2m+1) / v_F``.
    steps : int, optional
        Fixed step count.  By default the step starts at ``dt0`` and is halved
        until the transferred charge changes by less than ``step_tol``
        (at most ``max_refinements`` times; a ``RuntimeWarning`` is emitted
        and ``converged`` is False if that is not enough).

    Raises
    ------
    NormDriftError
        If any orbital norm drifts by more than ``1e-8``.
    """
    if lattice.boundary != "periodic":
        raise ValueError("Slater-sea evolution runs on a periodic ring")
    lattice.require_room(m)
    k = _k_of(fermi)
    if tau is None:
        tau = ratio * (2 * m + 1) / (2.0 * math.sin(k))
    N = lattice.n_sites
    h0 = lattice.one_body().toarray().real
    c = lattice.center
    h0[c - m, c - m] += cycle.vertices[0][0]
    h0[c + m, c + m] += cycle.vertices[0][1]
    eps, vecs = np.linalg.eigh(h0)
    occupied = vecs[:, eps < fermi]
    runs = []
    converged = True
    if steps is not None:
        charge, drift = _ring_run(lattice, cycle, m, tau, int(steps), occupied, impl)
        runs.append((int(steps), charge))
    else:
        n = max(1, int(math.ceil(tau / dt0)))
        charge, drift = _ring_run(lattice, cycle, m, tau, n, occupied, impl)
        runs.append((n, charge))
        converged = False
        for _ in range(max_refinements):
            n *= 2
            new, drift = _ring_run(lattice, cycle, m, tau, n, occupied, impl)
            runs.append((n, new))
            converged = abs(new - charge) < step_tol
            charge = new
            if converged:
                break
        if not converged:
            warnings.warn(f"time step not converged after {max_refinements} halvings "
                          f"(last change {abs(runs[-1][1] - runs[-2][1]):.2e})", RuntimeWarning, stacklevel=2)
    if drift > 1e-8:
        raise NormDriftError(f"orbital norm drifted by {drift:.3e}")
    res = SlaterRun(float(charge), int(occupied.shape[1]), float(tau), tau / runs[-1][0], runs[-1][0], drift,
                    runs, converged)
    return res if return_details else res.charge
