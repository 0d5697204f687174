"""Compare the compiled core against the pure-Python fallback.

Run with ``python benchmarks/bench_core.py``.  Two hot kernels are timed:

* the pair Green's function element (k-quadrature, all band segments), and
* Crank-Nicolson propagation of a Slater sea on the ring.

Both backends are checked to agree before timing.
"""
import argparse
import timeit

import numpy as np

from pairpump import _backend
from pairpump.config import DEFAULT_SETTINGS
from pairpump.lattice_green import _element_parts


def green_case(impl, m=2, z=complex(0.7, 1e-4)):
    return sum(_element_parts(m, z, DEFAULT_SETTINGS, impl)[:2])


def cn_case(impl, n_sites=400, n_orbitals=199, steps=20, seed=0):
    rng = np.random.default_rng(seed)
    psi, _ = np.linalg.qr(rng.normal(size=(n_sites, n_orbitals)) + 1j * rng.normal(size=(n_sites, n_orbitals)))
    psi = np.ascontiguousarray(psi)
    t = np.linspace(0.0, 2 * np.pi, steps + 1)
    vm = 2.25 + 1.75 * np.cos(t)
    vp = 2.25 + 1.75 * np.sin(t)
    onsite = np.zeros(n_sites)

    def step():
        out = psi.copy()  # propagated in place; the return value is the charge through the bond
        charge = _backend.cn_propagate(out, onsite, 0, 1, vm, vp, 0.5, n_sites // 2, impl=impl)
        return out, charge
    return step


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    try:
        fast = _backend.get("cython")
    except ImportError:
        print("compiled core not built; nothing to compare")
        return 1
    slow = _backend.get("python")

    print(f"{'kernel':<34}{'cython [ms]':>14}{'python [ms]':>14}{'speed-up':>10}")
    a, b = green_case(fast), green_case(slow)
    assert abs(a - b) < 1e-10 * abs(a), (a, b)
    rows = [("green element (m=2, E=0.7)", lambda: green_case(fast), lambda: green_case(slow), 1)]
    f, s = cn_case(fast), cn_case(slow)
    (pf, qf), (ps, qs) = f(), s()
    np.testing.assert_allclose(pf, ps, atol=1e-11)
    assert abs(qf - qs) < 1e-11
    rows.append(("CN step (N=400, 199 orbitals)", f, s, 20))
    for name, f, s, per in rows:
        tf = min(timeit.repeat(f, number=1, repeat=args.repeat)) / per * 1e3
        ts = min(timeit.repeat(s, number=1, repeat=args.repeat)) / per * 1e3
        print(f"{name:<34}{tf:>14.3f}{ts:>14.3f}{ts / tf:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
