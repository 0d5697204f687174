"""Build script for the optional compiled core (``pairpump._core``).

If Cython or a C compiler is unavailable the package still installs and runs on
the pure-Python fallback.
"""
from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("pairpump._core", ["src/pairpump/_core.pyx"],
                   include_dirs=[np.get_include()],
                   define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION"), ("CYTHON_CCOMPLEX", "1")],
                   extra_compile_args=["-O3", "-fcx-limited-range"])],
        compiler_directives={"language_level": 3},
    )
except ImportError:  # pragma: no cover - build without Cython
    pass

setup(ext_modules=ext_modules)
