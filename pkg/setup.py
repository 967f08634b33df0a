"""Build script for the compiled evaluation kernels.

The package works without the extension (a numpy fallback is selected at
import time), so the build degrades gracefully. With Cython installed the
extension is generated from the .pyx source; without it the pre-generated
C file is compiled directly; without a working C toolchain the extension
is skipped with a warning. With the preinstalled toolchain use

    pip install -e . --no-build-isolation
"""

import os
import sys

import numpy
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext
from setuptools.errors import CCompilerError, ExecError, PlatformError

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

EXT_KWARGS = dict(
    include_dirs=[numpy.get_include()],
    extra_compile_args=["-O3"],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

if cythonize is not None:
    extensions = cythonize(
        [Extension("msep._core", ["src/msep/_core.pyx"], **EXT_KWARGS)],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": "3",
        },
    )
elif os.path.exists("src/msep/_core.c"):
    extensions = [Extension("msep._core", ["src/msep/_core.c"], **EXT_KWARGS)]
else:
    extensions = []


class OptionalBuildExt(build_ext):
    """Treat a missing or broken C toolchain as a soft failure."""

    def run(self):
        try:
            super().run()
        except (CCompilerError, ExecError, PlatformError) as exc:
            self._skip(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except (CCompilerError, ExecError, PlatformError) as exc:
            self._skip(exc)

    def _skip(self, exc):
        print(
            f"warning: could not build the compiled kernels ({exc}); "
            "the pure numpy backend will be used instead",
            file=sys.stderr,
        )


setup(ext_modules=extensions, cmdclass={"build_ext": OptionalBuildExt})
