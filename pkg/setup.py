"""Build script for the optional compiled kernels.

The Cython extension is optional: if it cannot be compiled the package
falls back to the pure-Python kernels in ``conecontact._fallback``.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("CONECONTACT_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "conecontact._kernels",
                    ["src/conecontact/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
