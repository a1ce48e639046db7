"""Build script; compiles the optional Cython kernel when Cython is available.

The package works without the extension (a pure-Python kernel is selected at
import time), so a failed extension build must never break installation.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/penta/_kernels.pyx"],
        language_level=3,
    )
except Exception:
    pass

setup(ext_modules=ext_modules)
