"""Build script for the optional compiled subset-scan kernel.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); building it just makes the brute-force verifier
considerably faster.  Set DPCAT_NO_EXT=1 to skip the compile entirely.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Never fail the install because a C compiler is missing."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - depends on toolchain
            print(f"warning: skipping compiled kernel ({exc}); "
                  "dpcat will use the pure NumPy backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - depends on toolchain
            print(f"warning: could not build {ext.name} ({exc}); "
                  "dpcat will use the pure NumPy backend")


ext_modules = []
if not os.environ.get("DPCAT_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension(
                "dpcat._subsetscan",
                ["src/dpcat/_subsetscan.pyx"],
                extra_compile_args=["-O3"],
            )],
            language_level=3,
        )
    except ImportError:  # pragma: no cover - Cython not installed
        print("warning: Cython not available; dpcat will use the pure "
              "NumPy backend")

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
