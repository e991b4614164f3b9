"""Build the optional compiled query kernels.

The package works without the extension (a pure-Python kernel module is
selected at import time), so a missing Cython toolchain downgrades the
build instead of failing it.

Deliberately no -march=native / -ffast-math: the compiled kernels must
produce bit-identical floating-point results to the pure-Python fallback,
which rules out FMA contraction and reassociation.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "nnkit._ckernels",
                sources=["src/nnkit/_ckernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
        },
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
