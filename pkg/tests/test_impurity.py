import math

import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from pairpump.config import DEFAULT_SETTINGS
from pairpump.errors import ResonanceError
from pairpump.impurity import ImpurityState, KernelValue, kernel_from_elements, pump_kernel, t_matrix
from pairpump.lattice_green import ComplexEnergy, LatticeModel, PairGreen, g0_onsite, pair_green_elements

finite_u = st.floats(-6.0, 6.0, allow_nan=False)


def test_t_matrix_vanishes_without_interaction(settings):
    for e in (-5.0, 0.0, 2.0):
        assert t_matrix(0.0, e, settings) == 0


def test_t_matrix_hard_core_limit(settings):
    E = ComplexEnergy(0.0, 1e-6)
    g0 = g0_onsite(E, settings)
    assert abs(t_matrix(1e12, E, settings) - (-1.0 / g0)) / abs(1.0 / g0) < 1e-9
    assert t_matrix(math.inf, E, settings) == -1.0 / g0


def test_t_matrix_solves_lippmann_schwinger(settings):
    # T = U + U G0 T for a contact interaction
    E = ComplexEnergy(0.8, 1e-4)
    g0 = g0_onsite(E, settings)
    for u in (-3.0, 0.5, 2.0, 7.0):
        t = t_matrix(u, E, settings)
        assert abs(t - (u + u * g0 * t)) < 1e-12 * max(1, abs(t))


def test_t_matrix_pole_reported(settings):
    # above the band G0(0) is real: U = 1/G0 puts the bound pair exactly at E
    E = ComplexEnergy(4.5, 1e-12)
    g0 = g0_onsite(E, settings)
    with pytest.raises(ResonanceError) as info:
        t_matrix(1.0 / g0.real, E, settings)
    assert "u" in info.value.location and info.value.location["E"] == 4.5


@hsettings(max_examples=50, deadline=None)
@given(finite_u)
def test_t_matrix_small_u_limit(u):
    E = ComplexEnergy(0.3, 1e-3)
    t = t_matrix(u * 1e-6, E, DEFAULT_SETTINGS)
    assert abs(t) <= 1.01 * abs(u) * 1e-6 + 1e-300


def test_kernel_at_zero_interaction_is_onsite_imaginary_part(settings):
    el = pair_green_elements(1, 0.5, settings)
    k = pump_kernel(ImpurityState(0.0, 0.0), 0.5, LatticeModel(1), settings)
    assert k.k_minus == pytest.approx(el.g0.imag, rel=1e-14)
    assert k.k_plus == pytest.approx(el.g0.imag, rel=1e-14)


def test_kernel_below_band_vanishes(settings):
    for state in (ImpurityState(1.0, 3.0), ImpurityState(-2.0, 0.5), ImpurityState(0.0, 4.0)):
        for e in (-6.0, -4.2):
            k = pump_kernel(state, e, LatticeModel(1), settings)
            assert abs(k.k_minus) <= 10 * settings.eta
            assert abs(k.k_plus) <= 10 * settings.eta


def test_kernel_pinned_regression(settings):
    k = pump_kernel(ImpurityState(1.0, 3.0), ComplexEnergy(0.0, 1e-6), LatticeModel(1), settings)
    assert isinstance(k, KernelValue)
    assert k.k_minus == pytest.approx(-0.37294104707923886, abs=1e-9)
    assert k.k_plus == pytest.approx(-0.058396683926566384, abs=1e-9)


@hsettings(max_examples=60, deadline=None)
@given(st.floats(0.0, 6.0), st.floats(0.0, 6.0), st.sampled_from([-2.5, -0.7, 0.4, 1.9, 3.3]))
def test_kernel_exchange_symmetry(a, b, e):
    """K_-(U_-=a, U_+=b) equals K_+(U_-=b, U_+=a) once the cross-term branch maps G- -> -G+."""
    el = pair_green_elements(1, e, DEFAULT_SETTINGS)
    mapped = PairGreen(el.g0, el.g2, el.g_plus, -el.g_plus, el.error)
    km, _ = kernel_from_elements(a, b, mapped)
    _, kp = kernel_from_elements(b, a, mapped)
    assert km == pytest.approx(kp, rel=1e-12, abs=1e-14)


@hsettings(max_examples=60, deadline=None)
@given(finite_u, finite_u, st.sampled_from([-3.0, -1.0, 0.0, 0.5, 2.0]))
def test_kernel_is_real_and_finite(a, b, e):
    try:
        km, kp = kernel_from_elements(a, b, pair_green_elements(2, e, DEFAULT_SETTINGS))
    except ResonanceError:
        return
    assert isinstance(km, float) and isinstance(kp, float)
    assert math.isfinite(km) and math.isfinite(kp)


@pytest.mark.parametrize("which", [0, 1])
def test_kernel_continuous_at_zero_interaction(settings, which):
    el = pair_green_elements(1, 1.2, settings)
    vals = []
    for u in (1e-4, 1e-6, 1e-8, 0.0):
        args = (u, 2.0) if which == 0 else (2.0, u)
        vals.append(np.array(kernel_from_elements(*args, el)))
    for v in vals[:-1]:
        assert np.all(np.abs(v - vals[-1]) < 1e-3 * max(1.0, np.max(np.abs(vals[-1]))))
    assert np.all(np.abs(vals[-2] - vals[-1]) < 1e-7)


def test_alternate_pairing_swaps_branches(settings):
    el = pair_green_elements(1, 0.9, settings)
    swapped = PairGreen(el.g0, el.g2, el.g_minus, el.g_plus, el.error)
    assert kernel_from_elements(1.0, 2.5, el, "alternate") == kernel_from_elements(1.0, 2.5, swapped, "printed")
    assert kernel_from_elements(1.0, 2.5, el, "alternate") != kernel_from_elements(1.0, 2.5, el, "printed")


def test_two_impurity_denominator_floor():
    el = PairGreen(0.5 + 0j, 1.0 + 0j, 0j, 0j, 0.0)
    # T = u/(1 - u/2); with u = 1, T = 2 and 1 - T^2 G2^2 = -3, fine; pick T*T*G2^2 = 1
    u = 2.0 / 3.0  # T = (2/3)/(2/3) = 1
    with pytest.raises(ResonanceError):
        kernel_from_elements(u, u, el)


def test_impurity_state_t_matrices(settings):
    state = ImpurityState(1.0, -2.0)
    pair = state.t_matrices(0.4, settings)
    assert pair.t_minus == t_matrix(1.0, 0.4, settings)
    assert pair.t_plus == t_matrix(-2.0, 0.4, settings)
    with pytest.raises(ValueError):
        ImpurityState(math.inf, 0.0)
