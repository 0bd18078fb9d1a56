"""Build script for the optional compiled conv kernels.

The package works without the extension (a numpy fallback is selected at
import time), so the extension is marked optional: a missing compiler must
not break installation.
"""
import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext = Extension(
        "envinv.nn.kernels._ckernels",
        ["src/envinv/nn/kernels/_ckernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
