import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python fallback is used at import time
    cythonize = None

EXT_MODULES = []
if cythonize is not None and not os.environ.get("FRACKIRCHHOFF_NO_EXT"):
    EXT_MODULES = cythonize(
        [
            Extension(
                "frackirchhoff._kernels._core",
                [os.path.join("src", "frackirchhoff", "_kernels", "_core.pyx")],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=EXT_MODULES)
