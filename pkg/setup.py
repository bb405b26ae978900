"""Build script: compiles the optional tag-kernel extension when Cython is present.

The package is fully functional without the extension; `cynerkit._kernels`
falls back to the pure-Python implementation at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("CYNERKIT_PURE_PYTHON"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "cynerkit._kernels._ckernels",
                    ["src/cynerkit/_kernels/_ckernels.pyx"],
                    optional=True,
                )
            ],
            language_level="3",
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
