"""Build script for the optional compiled kernels.

The package is pure Python except for gridsplit._kernels, a small Cython
module holding the tree-edit DP and string edit distance inner loops.  If
Cython or a C compiler is unavailable the extension is skipped and the
package falls back to the pure-Python twin at import time.
"""

import os

from setuptools import Extension, setup


def _extensions():
    if os.environ.get("GRIDSPLIT_NO_EXT"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "gridsplit._kernels",
        ["src/gridsplit/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions())
