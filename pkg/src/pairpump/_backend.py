"""Selects the compiled core or the pure-Python fallback at import time.

Set ``PAIRPUMP_BACKEND=python`` to force the fallback.
"""
import os

from scipy import LowLevelCallable

from . import _fallback

BACKEND = "python"
_impl = _fallback
if os.environ.get("PAIRPUMP_BACKEND", "").lower() != "python":
    try:
        from . import _core as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback


def get(name=None):
    """Return the implementation module for ``name`` (``"cython"``/``"python"``) or the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _fallback
    if name == "cython":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")


def green_callables(impl=None):
    """(real part, imaginary part) integrands accepted by :func:`scipy.integrate.quad`.

    The integration variable is ``t`` in ``[0, pi]`` with ``k = a + (b - a)(1 - cos t)/2``;
    extra quad ``args`` are ``(2m, Re z, Im z, a, b)``.
    """
    impl = impl or _impl
    if impl is _fallback:
        return impl.green_re, impl.green_im
    return (LowLevelCallable.from_cython(impl, "green_re"),
            LowLevelCallable.from_cython(impl, "green_im"))


def cn_propagate(*args, impl=None):
    """Dispatch to ``cn_propagate`` of ``impl`` (module, backend name, or the active one)."""
    if isinstance(impl, str):
        impl = get(impl)
    return (impl or _impl).cn_propagate(*args)
