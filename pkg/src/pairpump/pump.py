r"""Pumped singlets per cycle as a line integral of the kernel over the pumping cycle.

Time is eliminated by :math:`\dot U\,dt = dU`, so for a closed path
:math:`\mathcal C` in the :math:`(U_-, U_+)` plane

.. math::

    Q_S = -\frac{1}{2\pi}\int dE\, F(E)\, \partial_E L(E),
    \qquad L(E) = \oint_{\mathcal C} \sum_{s=\pm} K_s(U_-, U_+; E)\, dU_s .

At zero temperature (``mode='zero_T'``) integration by parts leaves the
boundary term :math:`Q_S = -L(\mathcal E)/2\pi` at the maximum pair energy
:math:`\mathcal E`.  ``mode='finite_T'`` keeps the Fermi-weighted energy
integral with a Richardson-refined central difference for :math:`\partial_E`.

Sign convention: positive :math:`Q_S` means singlet pairs delivered to the
right lead (towards the ``+m`` impurity) per cycle.

The same machinery also gives the charge pumped by the one-body analogue
(two on-site potentials :math:`v_\mp` at sites :math:`\mp m`), see
:func:`single_particle_pumped_charge`.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .config import DEFAULT_SETTINGS
from .errors import BandEdgeError, PairPumpError, QuadratureError, ResonanceError
from .impurity import kernel_from_elements
from .lattice_green import PAIR_BAND, LatticeModel, pair_green_elements

__all__ = [
    "PumpCycle", "PairDistribution", "PumpResult", "CycleSchedule", "pumped_singlets",
    "pumped_singlets_timeparam", "loop_integral", "footprint_sweep", "energy_sweep",
    "single_particle_pumped_charge", "right_scattering_amplitudes", "adiabaticity_check",
    "max_group_velocity", "AdiabaticityWarning",
]


class AdiabaticityWarning(UserWarning):
    """The cycle period is not long compared with the dwell time."""


# ----------------------------------------------------------------------------
# cycles and distributions
# ----------------------------------------------------------------------------
@dataclass(frozen=True)
class PumpCycle:
    """Closed polygon in the :math:`(U_-, U_+)` plane.

    Parameters
    ----------
    vertices : sequence of (float, float)
        ``(u_minus, u_plus)`` points; first and last must coincide.
    tau : float
        Period; enters only the adiabaticity report.
    """

    vertices: tuple
    tau: float = 1e4

    def __post_init__(self):
        pts = tuple((float(a), float(b)) for a, b in self.vertices)
        if len(pts) < 2:
            raise ValueError("a cycle needs at least two vertices")
        if pts[0] != pts[-1]:
            raise ValueError("cycle is not closed: first vertex must equal last vertex")
        if not all(np.isfinite(pts).ravel()):
            raise ValueError("vertices must be finite")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        object.__setattr__(self, "vertices", pts)

    @classmethod
    def polygon(cls, points, tau=1e4):
        """Close ``points`` (append the first vertex) and build the cycle."""
        pts = [tuple(p) for p in points]
        if pts[0] != pts[-1]:
            pts.append(pts[0])
        return cls(tuple(pts), tau)

    @classmethod
    def square(cls, u_min, u_max, tau=1e4, orientation="counterclockwise"):
        """Square cycle (U_min,U_min) -> (U_max,U_min) -> (U_max,U_max) -> (U_min,U_max) -> back."""
        a, b = float(u_min), float(u_max)
        pts = ((a, a), (b, a), (b, b), (a, b), (a, a))
        cyc = cls(pts, tau)
        if orientation == "clockwise":
            return cyc.reversed()
        if orientation != "counterclockwise":
            raise ValueError("orientation must be 'counterclockwise' or 'clockwise'")
        return cyc

    @property
    def signed_area(self):
        x, y = np.array(self.vertices).T
        return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))

    @property
    def orientation(self):
        area = self.signed_area
        return "counterclockwise" if area > 0 else "clockwise" if area < 0 else "degenerate"

    def reversed(self):
        return PumpCycle(self.vertices[::-1], self.tau)

    def mirrored(self):
        """Swap the roles of the two impurities, (u_minus, u_plus) -> (u_plus, u_minus)."""
        return PumpCycle(tuple((b, a) for a, b in self.vertices), self.tau)

    def legs(self):
        """Non-degenerate legs as ((u-, u+) start, (u-, u+) end) pairs."""
        return [(p, q) for p, q in zip(self.vertices[:-1], self.vertices[1:]) if p != q]

    def as_dict(self):
        return {"vertices": [list(v) for v in self.vertices], "orientation": self.orientation,
                "signed_area": self.signed_area, "tau": self.tau}


@dataclass(frozen=True)
class PairDistribution:
    r"""Fermi occupation of pair energies, :math:`F(E) = 1/(e^{\beta(E-\mathcal E)} + 1)`."""

    e_max: float
    beta: float = 1e3
    mode: str = "zero_T"

    def __post_init__(self):
        if self.mode not in ("zero_T", "finite_T"):
            raise ValueError("mode must be 'zero_T' or 'finite_T'")
        if self.mode == "finite_T" and not self.beta > 0:
            raise ValueError("beta must be positive in finite_T mode")

    def occupation(self, E):
        x = self.beta * (np.asarray(E, dtype=float) - self.e_max)
        return 0.5 * (1.0 - np.tanh(0.5 * x))


@dataclass
class PumpResult:
    """Pumped singlet pairs per cycle with an error estimate and a diagnostic breakdown."""

    q_singlets: float
    error_estimate: float
    mode: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.error_estimate = abs(float(self.error_estimate))


# ----------------------------------------------------------------------------
# line integral at fixed energy
# ----------------------------------------------------------------------------
def _check_leg_poles(p, q, el, E, tol):
    """Raise if a kernel pole lies on the leg p -> q (closest-approach test)."""
    g0, g2 = el.g0, el.g2
    for u in (p[0], p[1], q[0], q[1]):
        if abs(1.0 - u * g0) < tol:
            raise ResonanceError("single-impurity pole on the cycle", {"E": E, "u": u})
    d = (q[0] - p[0], q[1] - p[1])
    moving = [s for s in (0, 1) if d[s] != 0.0]
    if len(moving) == 1:
        s = moving[0]
        other = p[1 - s]
        t_other = other / (1.0 - other * g0)
        c = g0 + t_other * g2 * g2
        lo, hi = sorted((p[s], q[s]))
        ustar = min(max(c.real / abs(c) ** 2, lo), hi) if c != 0 else lo
        if abs(1.0 - ustar * c) < tol:
            name = ("u_minus", "u_plus")[s]
            raise ResonanceError("two-impurity pole on a cycle leg", {"E": E, name: ustar})
    else:  # oblique leg: sampled check
        ts = np.linspace(0.0, 1.0, 401)
        um = p[0] + ts * d[0]
        up = p[1] + ts * d[1]
        tm, tp = um / (1 - um * g0), up / (1 - up * g0)
        den = np.abs((1 - um * g0) * (1 - up * g0) * (1 - tm * tp * g2 * g2))
        if np.min(den) < tol:
            i = int(np.argmin(den))
            raise ResonanceError("kernel pole on an oblique cycle leg", {"E": E, "u_minus": um[i], "u_plus": up[i]})


def _quad_checked(f, a, b, epsabs, epsrel, what, limit=200):
    res = quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)
    val, err = res[0], res[1]
    if len(res) > 3 and not err <= 100.0 * max(epsabs, epsrel * abs(val)):
        raise QuadratureError(f"{what} did not converge", err)
    return val, err


def loop_integral(cycle: PumpCycle, m, E, settings=DEFAULT_SETTINGS, *, with_legs=False):
    r"""Zero-temperature loop integral :math:`L(E) = \oint \sum_s K_s\, dU_s`.

    Returns
    -------
    value, error[, legs]
        ``legs`` lists ``(start, end, value, error)`` per leg.
    """
    legs = cycle.legs()
    if not legs:
        return (0.0, 0.0, []) if with_legs else (0.0, 0.0)
    el = pair_green_elements(m, E, settings)
    pairing = settings.sign_pairing
    total, err, rows = 0.0, float(el.error), []
    for p, q in legs:
        _check_leg_poles(p, q, el, E, settings.pole_tol)
        dm, dp = q[0] - p[0], q[1] - p[1]

        def f(t, p=p, dm=dm, dp=dp):
            km, kp = kernel_from_elements(p[0] + t * dm, p[1] + t * dp, el, pairing)
            return dm * km + dp * kp

        val, e = _quad_checked(f, 0.0, 1.0, settings.leg_epsabs, settings.leg_epsrel, "leg integral")
        total += val
        err += e
        rows.append((p, q, val, e))
    return (total, err, rows) if with_legs else (total, err)


# ----------------------------------------------------------------------------
# energy integration
# ----------------------------------------------------------------------------
def _energy_integral(loop, dist, settings):
    r"""Integral of :math:`F(E)\,\partial_E L(E)` over the pair band, ``L`` given by ``loop(E)``.

    ``settings.finite_t_scheme`` selects

    * ``'parts'`` -- :math:`[F L]_{lo}^{hi} - \int F'(E) L(E)\, dE`.  Exact
      rewriting; :math:`F'` is analytic and confined to a few :math:`1/\beta`
      around :math:`\mathcal E`, and no derivative of ``L`` is needed.
    * ``'fd'`` -- :math:`\int F\,\partial_E L` with a Richardson-refined central
      difference of step ``fd_step``.  ``L`` has structure of width
      :math:`\sim\eta` at the band bottom that a step much larger than
      :math:`\eta` smears out, so this scheme carries an error of order
      the height of that structure (:math:`\sim 10^{-3}`).

    The band top (4) caps the range: above it, kernel poles from bound pairs
    sit on the real axis.
    """
    lo = PAIR_BAND[0]
    hi = min(dist.e_max + 40.0 / dist.beta, PAIR_BAND[1])
    if hi <= lo:
        return 0.0, 0.0, {"energy_range": (lo, hi)}
    target = lambda v: 100 * max(settings.energy_epsabs, settings.leg_epsrel * abs(v))  # noqa: E731
    if settings.finite_t_scheme == "parts":
        a = max(lo, dist.e_max - 40.0 / dist.beta)
        boundary = float(dist.occupation(hi)) * loop(hi)[0] - float(dist.occupation(lo)) * loop(lo)[0]
        if hi <= a:
            return boundary, 0.0, {"energy_range": (lo, hi), "scheme": "parts"}

        def dF(E):
            x = 0.5 * dist.beta * (E - dist.e_max)
            return -0.25 * dist.beta / math.cosh(x) ** 2

        pts = [p for p in (0.0, dist.e_max) if a < p < hi]
        res = quad(lambda E: dF(E) * loop(E)[0], a, hi, points=pts or None, epsabs=settings.energy_epsabs,
                   epsrel=settings.leg_epsrel, limit=400, full_output=1)
        val, err = boundary - res[0], res[1]
        info = {"energy_range": (lo, hi), "window": (a, hi), "scheme": "parts",
                "energy_evaluations": int(res[2]["neval"])}
    else:
        h = settings.fd_step

        def dL(E):
            d1 = (loop(E + h)[0] - loop(E - h)[0]) / (2 * h)
            d2 = (loop(E + h / 2)[0] - loop(E - h / 2)[0]) / h
            return (4.0 * d2 - d1) / 3.0

        pts = [p for p in (0.0, dist.e_max) if lo < p < hi]
        res = quad(lambda E: float(dist.occupation(E)) * dL(E), lo, hi, points=pts or None,
                   epsabs=settings.energy_epsabs, epsrel=settings.leg_epsrel, limit=400, full_output=1)
        val, err = res[0], res[1]
        info = {"energy_range": (lo, hi), "scheme": "fd", "energy_evaluations": int(res[2]["neval"])}
    if len(res) > 3 and not err <= target(val):
        raise QuadratureError("finite-temperature energy integral did not converge", err)
    return val, err, info


def pumped_singlets(cycle: PumpCycle, model: LatticeModel, dist: PairDistribution,
                    settings=DEFAULT_SETTINGS) -> PumpResult:
    r"""Singlet pairs pumped per cycle, :math:`Q_S`.

    Parameters
    ----------
    cycle : PumpCycle
        Closed path in the :math:`(U_-, U_+)` plane.
    model : LatticeModel
        Impurity index ``m``.
    dist : PairDistribution
        ``zero_T`` evaluates the kernel at :math:`\mathcal E`; ``finite_T``
        integrates :math:`F(E)\,\partial_E L` over the pair band.
    settings : Settings
        Tolerances, broadening and sensitivity switches.

    Returns
    -------
    PumpResult

    Raises
    ------
    ResonanceError
        When a kernel pole lies on the cycle at a sampled energy.
    """
    scale = -1.0 / (2.0 * math.pi)
    if dist.mode == "zero_T":
        val, err, legs = loop_integral(cycle, model.m, dist.e_max, settings, with_legs=True)
        diag = {"legs": [{"start": list(p), "end": list(q), "value": scale * v, "error": abs(scale) * e}
                         for p, q, v, e in legs]}
        return PumpResult(scale * val + 0.0, abs(scale) * err, dist.mode, diag)
    if not cycle.legs():
        return PumpResult(0.0, 0.0, dist.mode, {"legs": []})
    val, err, info = _energy_integral(lambda E: loop_integral(cycle, model.m, E, settings), dist, settings)
    return PumpResult(scale * val + 0.0, abs(scale) * err, dist.mode, info)


# ----------------------------------------------------------------------------
# explicit time schedules
# ----------------------------------------------------------------------------
_PROFILES = {
    "uniform": (lambda s: s, lambda s: 1.0),
    "quadratic": (lambda s: s * s, lambda s: 2.0 * s),
    "smoothstep": (lambda s: s * s * (3.0 - 2.0 * s), lambda s: 6.0 * s * (1.0 - s)),
}


class CycleSchedule:
    """Explicit time dependence :math:`U_\\pm(t)` on ``[0, tau]``.

    Parameters
    ----------
    u, udot : callable
        ``u(t) -> (u_minus, u_plus)`` and its time derivative.
    tau : float
        Period.
    breaks : sequence of float
        Times where ``udot`` may be discontinuous (leg boundaries).
    """

    def __init__(self, u, udot, tau, breaks=()):
        self.u, self.udot, self.tau = u, udot, float(tau)
        self.breaks = sorted({0.0, self.tau, *[float(b) for b in breaks]})

    @classmethod
    def from_cycle(cls, cycle: PumpCycle, profile="uniform", durations=None):
        """Traverse each leg of ``cycle`` with a monotone profile ``phi(s)``, ``s`` in [0, 1].

        ``profile`` is ``'uniform'``, ``'quadratic'``, ``'smoothstep'`` or a pair
        of callables ``(phi, dphi)``.
        """
        phi, dphi = _PROFILES[profile] if isinstance(profile, str) else profile
        legs = list(zip(cycle.vertices[:-1], cycle.vertices[1:]))
        durations = np.full(len(legs), cycle.tau / len(legs)) if durations is None else np.asarray(durations, float)
        starts = np.concatenate([[0.0], np.cumsum(durations)])

        def locate(t):
            i = min(int(np.searchsorted(starts, t, side="right")) - 1, len(legs) - 1)
            return i, (t - starts[i]) / durations[i]

        def u(t):
            i, s = locate(t)
            (a0, a1), (b0, b1) = legs[i]
            f = phi(s)
            return a0 + f * (b0 - a0), a1 + f * (b1 - a1)

        def udot(t):
            i, s = locate(t)
            (a0, a1), (b0, b1) = legs[i]
            g = dphi(s) / durations[i]
            return g * (b0 - a0), g * (b1 - a1)

        return cls(u, udot, starts[-1], starts)

    @classmethod
    def frozen(cls, point, tau=1e4):
        """Static schedule: U held at ``point`` for the whole period."""
        point = (float(point[0]), float(point[1]))
        return cls(lambda t: point, lambda t: (0.0, 0.0), tau)


def _time_loop(schedule, m, E, settings):
    el = pair_green_elements(m, E, settings)
    pairing = settings.sign_pairing

    def f(t):
        dm, dp = schedule.udot(t)
        if dm == 0.0 and dp == 0.0:
            return 0.0
        um, up = schedule.u(t)
        km, kp = kernel_from_elements(um, up, el, pairing)
        return dm * km + dp * kp

    total, err = 0.0, 0.0
    for a, b in zip(schedule.breaks[:-1], schedule.breaks[1:]):
        if b <= a:
            continue
        val, e = _quad_checked(f, a, b, settings.leg_epsabs * (b - a) / schedule.tau,
                               settings.leg_epsrel, "time integral")
        total += val
        err += e
    return total, err


def pumped_singlets_timeparam(schedule: CycleSchedule, model: LatticeModel, dist: PairDistribution,
                              settings=DEFAULT_SETTINGS) -> PumpResult:
    r"""Same as :func:`pumped_singlets` but integrating :math:`\int_0^\tau dt\,\sum_s \dot U_s K_s` directly."""
    scale = -1.0 / (2.0 * math.pi)
    if dist.mode == "zero_T":
        val, err = _time_loop(schedule, model.m, dist.e_max, settings)
        return PumpResult(scale * val + 0.0, abs(scale) * err, dist.mode, {"segments": len(schedule.breaks) - 1})
    val, err, info = _energy_integral(lambda E: _time_loop(schedule, model.m, E, settings), dist, settings)
    return PumpResult(scale * val + 0.0, abs(scale) * err, dist.mode, info)


# ----------------------------------------------------------------------------
# sweeps
# ----------------------------------------------------------------------------
def _footprint_cell(args):
    a, b, m, dist, settings = args
    try:
        res = pumped_singlets(PumpCycle.square(a, b), LatticeModel(m), dist, settings)
        return (a, b), res.q_singlets, res.error_estimate, ""
    except PairPumpError as exc:
        return (a, b), float("nan"), float("nan"), str(exc)


def _run_cells(func, tasks, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(func, tasks, chunksize=4))
    else:
        results = [func(t) for t in tasks]
    return {key: rest for key, *rest in results}


def footprint_sweep(u_min_grid, u_max_grid, model: LatticeModel, dist: PairDistribution,
                    settings=DEFAULT_SETTINGS, workers=1):
    """Q_S of square cycles over a (U_min, U_max) grid (pairs with U_min <= U_max only).

    Returns
    -------
    list of dict
        Rows ``{u_min, u_max, q_singlets, error_estimate, error}`` in grid order;
        failed cells carry ``nan`` and the error message (the sweep continues).
    """
    cells = [(float(a), float(b)) for a in u_min_grid for b in u_max_grid if a <= b]
    tasks = [(a, b, model.m, dist, settings) for a, b in cells]
    out = _run_cells(_footprint_cell, tasks, workers)
    return [{"u_min": a, "u_max": b, "q_singlets": out[(a, b)][0], "error_estimate": out[(a, b)][1],
             "error": out[(a, b)][2]} for a, b in cells]


def _energy_cell(args):
    e, m, cycle, beta, mode, settings = args
    try:
        res = pumped_singlets(cycle, LatticeModel(m), PairDistribution(e, beta, mode), settings)
        return (e, m), res.q_singlets, res.error_estimate, ""
    except PairPumpError as exc:
        return (e, m), float("nan"), float("nan"), str(exc)


def energy_sweep(e_max_grid, m_list, cycle: PumpCycle, settings=DEFAULT_SETTINGS, beta=1e3,
                 mode="zero_T", workers=1):
    """Q_S as a function of the maximum pair energy for each impurity index in ``m_list``.

    Returns
    -------
    list of dict
        Rows ``{e_max, m, q_singlets, error_estimate, error}`` ordered by m, then energy.
    """
    keys = [(float(e), int(m)) for m in m_list for e in e_max_grid]
    out = _run_cells(_energy_cell, [(e, m, cycle, beta, mode, settings) for e, m in keys], workers)
    return [{"e_max": e, "m": m, "q_singlets": out[(e, m)][0], "error_estimate": out[(e, m)][1],
             "error": out[(e, m)][2]} for e, m in keys]


# ----------------------------------------------------------------------------
# one-body reduction
# ----------------------------------------------------------------------------
def _single_k(E):
    if not abs(E) < 2.0 - 1e-3:
        raise BandEdgeError(f"Fermi level {E} is outside or within 1e-3 of the one-particle band edge")
    return math.acos(-0.5 * E)


def right_scattering_amplitudes(v_minus, v_plus, m, E):
    r"""Amplitudes :math:`\psi(-m), \psi(+m)` of the state incident from the right.

    The state is normalised to a unit incoming wave :math:`e^{-ikn}` on the
    right and obtained by transfer matrices
    :math:`\psi_{n+1} = (v_n - E)\psi_n - \psi_{n-1}` started from a purely
    transmitted wave on the left.
    """
    k = _single_k(E)
    prev, cur = np.exp(1j * k * (m + 1)), np.exp(1j * k * m)  # psi(-m-1), psi(-m)
    amp = {-m: cur}
    for n in range(-m, m + 1):
        v = v_minus if n == -m else v_plus if n == m else 0.0
        prev, cur = cur, (v - E) * cur - prev
        amp[n + 1] = cur
    psi_m, psi_m1 = amp[m], amp[m + 1]
    # psi(n) = A e^{-ikn} + B e^{ikn} for n >= m
    det = np.exp(-1j * k * m) * np.exp(1j * k * (m + 1)) - np.exp(1j * k * m) * np.exp(-1j * k * (m + 1))
    A = (psi_m * np.exp(1j * k * (m + 1)) - psi_m1 * np.exp(1j * k * m)) / det
    return amp[-m] / A, psi_m / A


def single_particle_pumped_charge(cycle: PumpCycle, m, fermi, settings=DEFAULT_SETTINGS):
    r"""Charge pumped to the right per cycle by the one-body turnstile at zero temperature.

    .. math:: Q = \frac{1}{2\pi}\oint \sum_{s=\pm} \frac{|\psi_R(s m)|^2}{v_F}\, dv_s,

    the lattice form of the adiabatic formula: the matrix element of
    :math:`\dot V` in the instantaneous scattering state incident from the
    right, weighted by the inverse group velocity :math:`1/v_F = 1/(2\sin k_F)`.

    Parameters
    ----------
    cycle : PumpCycle
        Closed path in the :math:`(v_-, v_+)` plane.
    m : int
        Potentials sit at sites ``-m`` and ``+m``.
    fermi : float
        Fermi level, strictly inside ``(-2, 2)``.
    """
    k = _single_k(fermi)
    vf = 2.0 * math.sin(k)
    total = 0.0
    for p, q in cycle.legs():
        dm, dp = q[0] - p[0], q[1] - p[1]

        def f(t, p=p, dm=dm, dp=dp):
            a, b = right_scattering_amplitudes(p[0] + t * dm, p[1] + t * dp, m, fermi)
            return (dm * abs(a) ** 2 + dp * abs(b) ** 2) / vf

        total += _quad_checked(f, 0.0, 1.0, settings.leg_epsabs, settings.leg_epsrel, "one-body leg")[0]
    return total / (2.0 * math.pi) + 0.0


# ----------------------------------------------------------------------------
# adiabaticity
# ----------------------------------------------------------------------------
def max_group_velocity(energy, particles=2):
    r"""Largest one-particle group velocity compatible with total energy ``energy``.

    For ``particles=2`` the pair shares :math:`E = -2\cos k_1 - 2\cos k_2`; for
    ``particles=1`` it is :math:`2\sin k` with :math:`-2\cos k = E`.
    """
    half = 2.0 * (particles - 1) if particles > 1 else 0.0
    excess = max(abs(energy) - half, 0.0)  # |eps| the fastest particle must carry at least
    if excess >= 2.0:
        return 0.0
    return 2.0 * math.sqrt(1.0 - (excess / 2.0) ** 2)


def adiabaticity_check(tau, model: LatticeModel, dist: PairDistribution, threshold=100.0, particles=2):
    """Compare the period with the dwell time ``d/v`` in the pumping region.

    ``d = 2m + 1`` sites; ``v`` is the largest group velocity available at
    the distribution's maximum energy.  Emits :class:`AdiabaticityWarning`
    when ``tau / dwell < threshold``.

    Returns
    -------
    dict
        ``d``, ``velocity``, ``dwell_time``, ``tau``, ``ratio``, ``adiabatic`` ('yes'/'no').
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    d = 2 * model.m + 1
    v = max_group_velocity(dist.e_max, particles)
    dwell = d / v if v > 0 else math.inf
    ratio = tau / dwell
    ok = ratio >= threshold
    if not ok:
        warnings.warn(f"tau/dwell = {ratio:.3g} < {threshold:g}: cycle is not adiabatic", AdiabaticityWarning,
                      stacklevel=2)
    return {"d": d, "velocity": v, "dwell_time": dwell, "tau": float(tau), "ratio": ratio,
            "adiabatic": "yes" if ok else "no"}
