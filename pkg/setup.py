"""Build the optional Cython kernels.

The package runs without them; ``quartile_shift._backend`` falls back to the
pure-Python implementations when the extension is missing.
"""
import os

import numpy
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("QUARTILE_SHIFT_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "quartile_shift._kernels",
                    ["src/quartile_shift/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
