"""Builds the compiled convolution kernels.

The extension is optional at runtime: if it fails to build or import, the
package falls back to the pure-numpy kernels with identical results.
-ffp-contract=off keeps the compiler from fusing multiply-adds, which
would change the fixed summation rounding the kernels guarantee.
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "dialact.nn._conv_cy",
        ["src/dialact/nn/_conv_cy.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
