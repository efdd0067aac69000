import os

from setuptools import Extension, setup

# The compiled kernels are an optional speedup; the package falls back to
# chamberline._kernels_py when the extension is absent (CHAMBERLINE_PURE=1
# skips the build entirely).
ext_modules = []
if os.environ.get("CHAMBERLINE_PURE") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "chamberline._kernels",
                    ["src/chamberline/_kernels.pyx"],
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
