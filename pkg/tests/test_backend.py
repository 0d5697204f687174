import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from pairpump import _backend, _fallback
from pairpump.config import DEFAULT_SETTINGS
from pairpump.lattice_green import ComplexEnergy, g0_offdiag

compiled = pytest.mark.skipif(_backend.BACKEND != "cython", reason="compiled core not built")


def test_backend_selected():
    assert _backend.BACKEND in ("cython", "python")
    assert _backend.get("python") is _fallback
    with pytest.raises(ValueError):
        _backend.get("fortran")


def test_env_var_forces_fallback():
    code = "import pairpump._backend as b; print(b.BACKEND)"
    env = dict(os.environ, PAIRPUMP_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@compiled
@hsettings(max_examples=200, deadline=None)
@given(st.floats(0, np.pi), st.integers(0, 4), st.floats(-6, 6), st.floats(1e-8, 1.0))
def test_integrands_agree(k, m, e, eta):
    core = _backend.get("cython")
    z = complex(e, eta)
    a, b = core.green_integrand(k, m, z), _fallback.green_integrand(k, m, z)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(b))


@compiled
@pytest.mark.parametrize("e", [-4.5, -1.0, 0.5, 3.0])
def test_green_elements_agree(e):
    from pairpump.lattice_green import _element_parts
    z = complex(e, 1e-4)
    a = _element_parts(1, z, DEFAULT_SETTINGS, _backend.get("cython"))
    b = _element_parts(1, z, DEFAULT_SETTINGS, _fallback)
    assert abs(a[0] - b[0]) < 1e-10


@compiled
def test_cn_propagate_agrees():
    rng = np.random.default_rng(3)
    n, cols, steps = 30, 5, 50
    psi0 = rng.normal(size=(n, cols)) + 1j * rng.normal(size=(n, cols))
    psi0 /= np.linalg.norm(psi0, axis=0)
    vm, vp = rng.uniform(0, 4, steps), rng.uniform(0, 4, steps)
    out = []
    for impl in ("cython", "python"):
        psi = psi0.copy()
        q = _backend.cn_propagate(psi, np.zeros(n), 10, 14, vm, vp, 0.3, 0, impl=impl)
        out.append((q, psi))
    assert abs(out[0][0] - out[1][0]) < 1e-12
    np.testing.assert_allclose(out[0][1], out[1][1], atol=1e-12)


@pytest.mark.parametrize("impl", ["python", "cython"])
def test_cn_propagate_unitary_and_second_order(impl):
    if impl == "cython" and _backend.BACKEND != "cython":
        pytest.skip("compiled core not built")
    from scipy.linalg import expm
    n, t_final = 12, 2.0
    h = np.diag(-np.ones(n - 1), 1) + np.diag(-np.ones(n - 1), -1)
    h[0, -1] = h[-1, 0] = -1
    h[3, 3], h[5, 5] = 1.0, 2.0
    start = np.zeros((n, 1), complex)
    start[4, 0] = 1.0
    exact = expm(-1j * h * t_final) @ start
    errors = []
    for steps in (100, 200, 400):
        psi = start.copy()
        _backend.cn_propagate(psi, np.zeros(n), 3, 5, np.full(steps, 1.0), np.full(steps, 2.0), t_final / steps,
                              8, impl=impl)
        assert abs(np.linalg.norm(psi) - 1) < 1e-12
        errors.append(np.max(np.abs(psi - exact)))
    assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.05)
    assert errors[1] / errors[2] == pytest.approx(4.0, rel=0.05)


@pytest.mark.parametrize("impl", ["python", "cython"])
def test_cn_current_obeys_discrete_continuity(impl):
    """Q(bond b) - Q(bond k) equals the occupation gained by sites b+1..k."""
    if impl == "cython" and _backend.BACKEND != "cython":
        pytest.skip("compiled core not built")
    rng = np.random.default_rng(7)
    n, steps, b, k = 16, 300, 2, 9
    psi0 = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
    psi0 /= np.linalg.norm(psi0, axis=0)
    vm, vp = np.linspace(0, 3, steps), np.linspace(2, 0.5, steps)
    charges = []
    for bond in (b, k):
        psi = psi0.copy()
        charges.append(_backend.cn_propagate(psi, np.zeros(n), 5, 12, vm, vp, 0.05, bond, impl=impl))
    region = slice(b + 1, k + 1)
    gained = np.sum(np.abs(psi[region]) ** 2) - np.sum(np.abs(psi0[region]) ** 2)
    assert abs((charges[0] - charges[1]) - gained) < 1e-12


def test_ring_too_small():
    with pytest.raises(ValueError):
        _fallback.cn_propagate(np.zeros((2, 1), complex), np.zeros(2), 0, 1, np.zeros(1), np.zeros(1), 0.1, 0)
