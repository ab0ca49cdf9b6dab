"""Build script for the optional compiled step kernel.

The package is fully functional without the extension (a numpy fallback is
selected at import); set MILLIBOTS_NO_EXT=1 to skip compilation entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("MILLIBOTS_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "millibots._kernels._step",
                    ["src/millibots/_kernels/_step.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except Exception as exc:  # pragma: no cover - build host without toolchain
        print(f"millibots: skipping compiled kernel ({exc}); numpy fallback will be used")
        ext_modules = []

setup(ext_modules=ext_modules)
