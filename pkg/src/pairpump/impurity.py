r"""T-matrices of the two Hubbard impurities and the energy-resolved pumping kernel.

A Hubbard impurity of strength :math:`U` at site :math:`s` acts only on the
doubly occupied pair state :math:`|s,s\rangle`.  With the retarded resolvent
:math:`G_0 = (z - H_0)^{-1}` the single-impurity T-matrix is

.. math:: T = \frac{U}{1 - U G_0(0)} = \frac{1}{U^{-1} - G_0(0)},

which follows from :math:`G = G_0 + G_0 U G` at the impurity site and is
confirmed by the finite-lattice extraction in :mod:`pairpump.oracle`.

For the two impurities at :math:`\mp m` the kernel multiplying
:math:`\dot U_\pm` is

.. math::

    K_\pm = \frac{\left|\frac{1}{1 - U_\pm G_0(0)}\right|^2
        \left[\operatorname{Im}G_0(0)\,(1 + |T_\mp G_0(2\bar m)|^2)
        \pm 2\operatorname{Im}\{T_\mp G_0(2\bar m) G_0^\pm(2\bar m)\}\right]}
        {|1 - T_\mp T_\pm G_0(2\bar m)^2|^2},

where :math:`|T_\pm|^2/U_\pm^2` has been cancelled algebraically so that
:math:`U_\pm = 0` is regular.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_SETTINGS
from .errors import ResonanceError
from .lattice_green import ComplexEnergy, LatticeModel, PairGreen, g0_onsite, pair_green_elements

__all__ = ["ImpurityState", "TMatrixPair", "KernelValue", "t_matrix", "pump_kernel", "kernel_from_elements"]

#: smallest admissible |1 - T_- T_+ G0(2m)^2|^2
DENOMINATOR_FLOOR = 1e-30


@dataclass(frozen=True)
class ImpurityState:
    """Instantaneous interaction strengths at the pair sites ``(-m,-m)`` and ``(+m,+m)``."""

    u_minus: float
    u_plus: float

    def __post_init__(self):
        if not (np.isfinite(self.u_minus) and np.isfinite(self.u_plus)):
            raise ValueError("interaction strengths must be finite")

    def t_matrices(self, E, settings=DEFAULT_SETTINGS):
        g0 = _onsite(E, settings)
        return TMatrixPair(_t(self.u_minus, g0, E), _t(self.u_plus, g0, E))


@dataclass(frozen=True)
class TMatrixPair:
    t_minus: complex
    t_plus: complex


@dataclass(frozen=True)
class KernelValue:
    """Kernel multiplying ``dU_-/dt`` (``k_minus``) and ``dU_+/dt`` (``k_plus``)."""

    k_minus: float
    k_plus: float


def _onsite(E, settings):
    if isinstance(E, ComplexEnergy):
        return g0_onsite(E, settings)
    return g0_onsite(ComplexEnergy(float(E), settings.eta), settings)


def _t(u, g0, E=None, pole_tol=DEFAULT_SETTINGS.pole_tol):
    if u == 0:
        return 0j
    if np.isinf(u):
        return -1.0 / g0
    den = 1.0 - u * g0
    if abs(den) < pole_tol:
        where = {"u": float(u)}
        if E is not None:
            where["E"] = float(E.re if isinstance(E, ComplexEnergy) else np.real(E))
        raise ResonanceError("single-impurity T-matrix pole (bound pair state at real energy)", where)
    return u / den


def t_matrix(u, E, settings=DEFAULT_SETTINGS):
    r"""Single-impurity T-matrix :math:`T = 1/(U^{-1} - G_0(0))`.

    Parameters
    ----------
    u : float
        Interaction strength; ``0`` gives ``0`` and ``inf`` the hard-core
        limit :math:`-1/G_0(0)`.
    E : ComplexEnergy or float
        Pair energy (a float uses ``settings.eta``).

    Raises
    ------
    ResonanceError
        If :math:`|1 - U G_0(0)|` falls below ``settings.pole_tol``.
    """
    return _t(u, _onsite(E, settings), E, settings.pole_tol)


def kernel_from_elements(u_minus, u_plus, elements: PairGreen, sign_pairing="printed"):
    """Kernel ``(K_-, K_+)`` from precomputed pair elements (no pole checks beyond the floor).

    ``sign_pairing='alternate'`` swaps the forced branches between the two summands
    (sensitivity switch).
    """
    g0, g2 = elements.g0, elements.g2
    gp, gm = elements.g_plus, elements.g_minus
    if sign_pairing == "alternate":
        gp, gm = gm, gp
    am = 1.0 / (1.0 - u_minus * g0)
    ap = 1.0 / (1.0 - u_plus * g0)
    tm, tp = u_minus * am, u_plus * ap
    den = abs(1.0 - tm * tp * g2 * g2) ** 2
    if not den > DENOMINATOR_FLOOR:
        raise ResonanceError("two-impurity denominator vanishes", {"u_minus": u_minus, "u_plus": u_plus})
    im0 = g0.imag
    kp = abs(ap) ** 2 * (im0 * (1.0 + abs(tm * g2) ** 2) + 2.0 * (tm * g2 * gp).imag) / den
    km = abs(am) ** 2 * (im0 * (1.0 + abs(tp * g2) ** 2) - 2.0 * (tp * g2 * gm).imag) / den
    return km, kp


def pump_kernel(state: ImpurityState, E, model: LatticeModel, settings=DEFAULT_SETTINGS) -> KernelValue:
    """Energy-resolved pumping kernel for the instantaneous impurity state.

    Parameters
    ----------
    state : ImpurityState
    E : ComplexEnergy or float
        Pair energy (a float uses ``settings.eta``).
    model : LatticeModel
        Supplies the impurity index ``m``.
    settings : Settings
        Tolerances, branch and sign-pairing switches.

    Returns
    -------
    KernelValue
    """
    elements = pair_green_elements(model.m, E, settings)
    for u in (state.u_minus, state.u_plus):
        _t(u, elements.g0, E, settings.pole_tol)
    km, kp = kernel_from_elements(state.u_minus, state.u_plus, elements, settings.sign_pairing)
    return KernelValue(float(km), float(kp))
