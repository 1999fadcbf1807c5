import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; kernels fall back at import
    cythonize = None


def _extensions():
    if cythonize is None or os.environ.get("EXTREMAL_DECAY_NO_EXT"):
        return []
    random_lib = os.path.join(os.path.dirname(np.random.__file__), "lib")
    ext = Extension(
        "extremal_decay._kernels",
        ["src/extremal_decay/_kernels.pyx"],
        include_dirs=[np.get_include()],
        library_dirs=[random_lib],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # keep float semantics identical to the numpy fallback
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions())
