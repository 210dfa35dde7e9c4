"""Build script: compiles the optional Cython evaluation kernel.

The package works without the extension (a pure-numpy fallback is selected
at import time), so any build failure here downgrades to a warning.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/neuronlab/_kernel.pyx",
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    warnings.warn(f"Cython kernel not built ({exc}); using pure-Python fallback")

setup(ext_modules=ext_modules)
