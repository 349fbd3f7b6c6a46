"""Builds the optional compiled kernels.

The package works without the extension (a numpy fallback is selected at
import time), so a missing compiler or Cython only costs speed.
"""

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    # -ffp-contract=off keeps the C arithmetic bit-identical to the numpy
    # fallback (no FMA contraction), which the backend-equivalence tests rely on.
    ext_modules = cythonize(
        [
            Extension(
                "regbench._kernels._native",
                ["src/regbench/_kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
