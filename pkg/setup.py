"""Build script: compiles the optional Cython pitch kernel.

If the toolchain is unavailable the build falls back to a pure-Python
package; trivox.dsp.kernels selects the numpy implementation at import.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("TRIVOX_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "trivox.dsp._yin_core",
                    ["src/trivox/dsp/_yin_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
