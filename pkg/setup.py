"""Build script: compiles the optional stencil extension when a toolchain is available.

The compiled module ``metloop.diag._stencils`` accelerates the finite-difference
and column-integration kernels. If Cython or a C compiler is missing (or
METLOOP_NO_EXT=1 is set), the package installs without it and the pure-NumPy
fallback in ``metloop.diag._stencils_py`` is selected at import time.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("METLOOP_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "metloop.diag._stencils",
                    ["src/metloop/diag/_stencils.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
