"""Build script: compiles the optional C accelerator for the loss kernels.

The package works without the extension (rttloc.kernels falls back to the
numpy implementation), so any failure to cythonize is non-fatal.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "rttloc._native",
                sources=["src/rttloc/_native.pyx"],
                # -ffp-contract=off keeps the C kernels bit-identical to the
                # numpy fallback (no FMA contraction of a*b+c).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
