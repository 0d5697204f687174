r"""Free retarded Green's functions of the infinite 1D tight-binding chain.

Conventions
-----------
One particle hops with amplitude :math:`-1` between nearest neighbours and has
zero on-site energy, so :math:`\varepsilon(k) = -2\cos k`.  Energies are in
units of the hopping.  A *pair* lives in the two-particle product space with
energy :math:`E = \varepsilon(k_1) + \varepsilon(k_2) \in [-4, 4]`.

The two-particle element between the doubly occupied sites :math:`(n,n)` and
:math:`(n+2m, n+2m)` is the one-dimensional integral

.. math::

    G_0(2\bar m; z) = \int_0^\pi \frac{dk}{2\pi}\,
        \frac{\cos(2mk)\, e^{-2m\lambda}}{\sinh\lambda},
    \qquad \cosh\lambda = z/2 - \cos k,\ \operatorname{Re}\lambda > 0,

obtained by doing the :math:`k_2` integral of the double Brillouin-zone
integral in closed form and folding :math:`k_1 \to \pi - k` onto
:math:`[0, \pi]`.  Because the integrand is even in :math:`k` under the fold,
the phase factor enters as :math:`\cos(2mk)`; a bare :math:`e^{2imk}` on the
half zone does not reproduce the lattice resolvent (see the oracle tests).
:math:`m = 0` gives the on-site element :math:`G_0(0)`.

Forced-branch elements
----------------------
:math:`G_0^\pm(2\bar m)` evaluate the same integral with :math:`\lambda`
pinned to :math:`\pm i|\lambda|` on the *propagating* part of the
:math:`k` range, :math:`|E/2 - \cos k| < 1`.  We regularise with the same
:math:`\eta` as the retarded element: the ``+`` branch uses the retarded root
itself (which tends to :math:`+i|\lambda|`) and the ``-`` branch its complex
conjugate.  On *evanescent* segments :math:`\lambda` is real and no
propagating flux exists; ``evanescent="drop"`` (default) omits those segments,
``"keep"`` adds the ordinary retarded contribution to both signs.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad

from . import _backend
from .config import DEFAULT_SETTINGS
from .errors import BandEdgeError, QuadratureError

__all__ = [
    "LatticeModel", "ComplexEnergy", "PairGreen", "relative_log", "g0_offdiag", "g0_onsite",
    "g0_forced_branch", "pair_green_elements", "single_green", "band_breakpoints",
    "PAIR_BAND", "SINGLE_BAND",
]

#: two-particle band [-4, 4] and one-particle band [-2, 2]
PAIR_BAND = (-4.0, 4.0)
SINGLE_BAND = (-2.0, 2.0)


@dataclass(frozen=True)
class LatticeModel:
    """Chain conventions: unit hopping, zero on-site energy, impurities at ``-m`` and ``+m``."""

    m: int = 1
    hopping: float = 1.0
    onsite: float = 0.0

    def __post_init__(self):
        if self.hopping != 1.0 or self.onsite != 0.0:
            raise ValueError("energies are in units of the hopping: hopping=1, onsite=0")
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"impurity index m must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))


@dataclass(frozen=True)
class ComplexEnergy:
    """Pair energy ``re`` with retarded shift ``+i eta`` (``eta > 0``)."""

    re: float
    eta: float = DEFAULT_SETTINGS.eta

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta!r}")

    @property
    def z(self) -> complex:
        return complex(self.re, self.eta)


def _as_z(E):
    if isinstance(E, ComplexEnergy):
        return E.z
    z = complex(E)
    if z.imag == 0.0:
        raise ValueError("a real energy needs a broadening; pass ComplexEnergy(E, eta) or E + 1j*eta")
    return z


def relative_log(k, E):
    r"""Root :math:`\lambda` of :math:`\cosh\lambda = z/2 - \cos k` with :math:`\operatorname{Re}\lambda \ge 0`.

    Parameters
    ----------
    k : float or array_like
        Momentum in :math:`[0, \pi]`.
    E : ComplexEnergy or complex
        Energy.  A complex ``z`` with ``Im z = 0`` is accepted here (and only
        here) to probe the unbroadened branch.

    Returns
    -------
    complex or ndarray
        :math:`\lambda`; the imaginary part is defined modulo :math:`2\pi`,
        which leaves every integrand unchanged.

    Raises
    ------
    BandEdgeError
        For ``Im z = 0`` exactly on a band edge, :math:`|z/2 - \cos k| = 1`.

    Notes
    -----
    For real ``w = z/2 - cos k < -1`` the root is :math:`\ln(|w| + \sqrt{w^2-1}) + i\pi`,
    since :math:`\cosh` of a real number is never negative.
    """
    z = E.z if isinstance(E, ComplexEnergy) else complex(E)
    k = np.asarray(k, dtype=float)
    w = np.asarray(0.5 * z - np.cos(k), dtype=complex)
    if z.imag == 0.0 and np.any(np.abs(w) == 1.0):
        raise BandEdgeError(f"band-edge singularity: |z/2 - cos k| = 1 at z={z}")
    lam = np.arccosh(w)
    lam = np.where(lam.real < 0, -lam, lam)
    return lam[()] if lam.ndim == 0 else lam


def band_breakpoints(e_re):
    """Momenta in (0, pi) where ``|E/2 - cos k| = 1`` (propagating/evanescent boundaries)."""
    pts = []
    for c in (0.5 * e_re - 1.0, 0.5 * e_re + 1.0):
        if -1.0 < c < 1.0:
            pts.append(float(np.arccos(c)))
    return sorted(pts)


def _segments(e_re):
    edges = [0.0, *band_breakpoints(e_re), np.pi]
    segs = []
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        segs.append((a, b, abs(0.5 * e_re - np.cos(mid)) < 1.0))
    return segs


def _quad_complex(m, z, a, b, settings, impl):
    f_re, f_im = _backend.green_callables(impl)
    args = (2.0 * m, z.real, z.imag, a, b)
    limit = max(50, settings.green_max_evals // 42)
    total, err = 0.0j, 0.0
    for part, f in ((1.0, f_re), (1.0j, f_im)):
        res = quad(f, 0.0, np.pi, args=args, epsabs=settings.green_epsabs, epsrel=settings.green_epsrel,
                   limit=limit, full_output=1)
        val, abserr = res[0], res[1]
        if len(res) > 3:  # QUADPACK flagged a problem; accept only if the estimate is still fine
            target = max(settings.green_epsabs, settings.green_epsrel * abs(val))
            if not abserr <= 100.0 * target:
                raise QuadratureError(f"k-integral for m={m}, z={z} on [{a:.6g}, {b:.6g}] did not converge",
                                      abserr)
        total += part * val
        err += abserr
    return total, err


def _element_parts(m, z, settings, impl=None):
    """(full, propagating part, evanescent part, error) of the m-th pair element."""
    full, prop, evan, err = 0.0j, 0.0j, 0.0j, 0.0
    for a, b, propagating in _segments(z.real):
        val, e = _quad_complex(m, z, a, b, settings, impl)
        full += val
        err += e
        if propagating:
            prop += val
        else:
            evan += val
    scale = 1.0 / (2.0 * np.pi)
    return full * scale, prop * scale, evan * scale, err * scale


def _extrapolated_parts(m, z, settings, impl=None):
    parts = np.array(_element_parts(m, z, settings, impl))
    if not settings.richardson:
        return parts
    half = np.array(_element_parts(m, complex(z.real, 0.5 * z.imag), settings, impl))
    out = 2.0 * half - parts
    out[3] = abs(parts[3]) + abs(half[3]) + abs(out[0] - half[0])
    return out


def g0_offdiag(m, E, settings=DEFAULT_SETTINGS, *, return_error=False):
    r"""Two-particle element :math:`G_0(2\bar m) = \langle m,m|G_0|{-m},{-m}\rangle`.

    Parameters
    ----------
    m : int
        Impurity index (``m >= 0``; ``m = 0`` is the on-site element).
    E : ComplexEnergy or complex
        Pair energy.  ``Im z < 0`` gives the advanced element.
    settings : Settings
        Quadrature tolerances and the optional Richardson extrapolation.
    return_error : bool
        Also return the absolute error estimate.

    Returns
    -------
    complex or (complex, float)

    Raises
    ------
    QuadratureError
        If QUADPACK cannot reach the tolerance.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    full, _, _, err = _extrapolated_parts(int(m), _as_z(E), settings)
    return (complex(full), float(err.real)) if return_error else complex(full)


def g0_onsite(E, settings=DEFAULT_SETTINGS, *, return_error=False):
    r"""On-site pair element :math:`G_0(0) = \langle n,n|G_0|n,n\rangle`."""
    return g0_offdiag(0, E, settings, return_error=return_error)


def g0_forced_branch(m, E, sign, settings=DEFAULT_SETTINGS, *, evanescent=None, return_error=False):
    r"""Forced-branch element :math:`G_0^\pm(2\bar m)`.

    Parameters
    ----------
    m : int
        Impurity index, ``m >= 1``.
    E : ComplexEnergy or complex
        Pair energy (retarded).
    sign : {'+', '-', +1, -1}
        Branch :math:`\lambda = \pm i|\lambda|` on propagating momenta.
    evanescent : {'drop', 'keep'}, optional
        Treatment of evanescent momenta; defaults to ``settings.evanescent_branch``.

    Returns
    -------
    complex or (complex, float)

    Notes
    -----
    With ``evanescent='drop'`` :math:`G_0^+` is the propagating part of
    :math:`G_0(2\bar m)` and :math:`G_0^- = \overline{G_0^+}`.  The combination
    :math:`i G_0^+` is then the cross-interference flux carried to the right
    by pairs scattered at the two impurities, which is what the kernel needs.
    """
    if m < 1:
        raise ValueError("forced-branch elements need m >= 1")
    s = _sign(sign)
    mode = evanescent or settings.evanescent_branch
    if mode not in ("drop", "keep"):
        raise ValueError(f"evanescent must be 'drop' or 'keep', got {mode!r}")
    z = _as_z(E)
    if z.imag <= 0:
        raise ValueError("forced-branch elements are defined for retarded energies")
    _, prop, evan, err = _extrapolated_parts(int(m), z, settings)
    val = prop if s > 0 else np.conj(prop)
    if mode == "keep":
        val = val + evan
    return (complex(val), float(err.real)) if return_error else complex(val)


def _sign(sign):
    if sign in ("+", 1, +1.0):
        return 1
    if sign in ("-", -1, -1.0):
        return -1
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


class PairGreen(NamedTuple):
    """The four pair elements needed by the kernel at one energy."""

    g0: complex       #: on-site G0(0)
    g2: complex       #: G0(2m)
    g_plus: complex   #: forced branch +
    g_minus: complex  #: forced branch -
    error: float      #: summed absolute quadrature error estimate


@functools.lru_cache(maxsize=65536)
def _pair_green_cached(m, e_re, settings):
    z = complex(e_re, settings.eta)
    g0, _, _, e0 = _extrapolated_parts(0, z, settings)
    g2, prop, evan, e2 = _extrapolated_parts(m, z, settings)
    gp, gm = prop, np.conj(prop)
    if settings.evanescent_branch == "keep":
        gp, gm = gp + evan, gm + evan
    return PairGreen(complex(g0), complex(g2), complex(gp), complex(gm), float(abs(e0) + abs(e2)))


def pair_green_elements(m, E, settings=DEFAULT_SETTINGS):
    """All pair elements at one energy (memoised on ``(m, E, settings)``).

    Parameters
    ----------
    m : int
        Impurity index.
    E : float or ComplexEnergy
        Real pair energy; the broadening is ``settings.eta`` (a ComplexEnergy
        overrides it).
    """
    if isinstance(E, ComplexEnergy):
        settings = settings.replace(eta=E.eta)
        E = E.re
    return _pair_green_cached(int(m), float(E), settings)


def single_green(n, E):
    r"""One-particle retarded element :math:`g(n) = \langle n|(z - H_1)^{-1}|0\rangle`.

    Closed form :math:`g(n) = x^{|n|}/(z + 2x)` where :math:`x` is the root of
    :math:`x^2 + zx + 1 = 0` with :math:`|x| < 1` (outgoing/decaying waves).

    Parameters
    ----------
    n : int or array_like
        Site offset.
    E : ComplexEnergy or complex
        One-particle energy; band edges at ``|E| = 2``.

    Raises
    ------
    BandEdgeError
        For ``|E| = 2`` with zero broadening.
    """
    z = E.z if isinstance(E, ComplexEnergy) else complex(E)
    if z.imag == 0.0 and abs(z.real) == 2.0:
        raise BandEdgeError("one-particle band edge |E| = 2 with no broadening")
    root = np.sqrt(z * z - 4.0 + 0j)
    x1, x2 = 0.5 * (-z + root), 0.5 * (-z - root)
    x = x1 if abs(x1) < abs(x2) else x2
    if z.imag == 0.0 and abs(z.real) < 2.0:
        # inside the band without broadening: choose the outgoing root (limit eta -> 0+)
        x = 0.5 * (-z.real + 1j * np.sqrt(4.0 - z.real ** 2))
    n = np.abs(np.asarray(n))
    out = x ** n / (z + 2.0 * x)
    return complex(out) if out.ndim == 0 else out
