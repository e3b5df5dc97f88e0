"""Build script for the optional compiled kernels.

The package is fully functional without the extension: ``protforge.kernels``
falls back to NumPy implementations when ``protforge.kernels._native`` is
missing or when PROTFORGE_PURE_PYTHON=1 is set.  Any compiler failure is
therefore downgraded to a warning instead of aborting the install.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        import warnings

        warnings.warn(
            "could not build the native kernels (%s); "
            "protforge will use the pure NumPy fallback" % exc
        )


def extensions():
    if os.environ.get("PROTFORGE_NO_EXT"):
        return []
    import numpy
    from Cython.Build import cythonize

    ext = Extension(
        "protforge.kernels._native",
        ["src/protforge/kernels/_native.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
