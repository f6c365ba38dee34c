"""Builds the optional compiled interpolation core.

The package works without the extension (a pure-numpy fallback is selected at
import time), so build failures here are non-fatal for development installs:
run with STCOV_SKIP_EXT=1 to skip compiling.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("STCOV_SKIP_EXT"):
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/stcov/_interp/_core.pyx"],
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())

setup(ext_modules=ext_modules)
