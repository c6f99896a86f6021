"""Build script for the optional compiled permanent kernels.

The package works without the extension: csrank._kernels falls back to the
vectorized numpy implementation when the compiled module is absent.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "csrank._kernels._glynn_ryser",
                ["src/csrank/_kernels/_glynn_ryser.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level="3",
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
