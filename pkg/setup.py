"""Build script: compiles the optional Cython kernel core.

The package works without the extension (a pure-Python kernel module is
selected at import time), so a failed compile downgrades to a warning
instead of breaking the install.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible, warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001 - any toolchain failure is non-fatal
            warnings.warn(f"compiled kernels unavailable, using pure-Python fallback: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            warnings.warn(f"failed to build {ext.name}, using pure-Python fallback: {exc}")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        warnings.warn("Cython not available, skipping compiled kernels")
        return []
    ext = Extension(
        "tiltrotor._core.kernels_cy",
        ["src/tiltrotor/_core/kernels_cy.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
