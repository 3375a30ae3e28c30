import os

import numpy as np
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the Cython core when possible; the numpy fallback covers failures."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"warning: compiled kernels not built ({exc}); using numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: failed to build {ext.name} ({exc}); using numpy fallback")


def _extensions():
    if os.environ.get("ZONEFIT_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    compile_args = ["-O3", "-ffast-math", "-fopenmp"]
    if not os.environ.get("ZONEFIT_PORTABLE"):
        # Wide vectors let libmvec's 8-lane exp/log kick in on AVX-512 parts;
        # gcc otherwise caps auto-vectorization at 256 bits.
        compile_args += ["-march=native", "-mprefer-vector-width=512"]
    extensions = [
        Extension(
            "zonefit._ckernels",
            ["src/zonefit/_ckernels.pyx"],
            include_dirs=[np.get_include()],
            extra_compile_args=compile_args,
            extra_link_args=["-fopenmp", "-lmvec"],
        )
    ]
    return cythonize(extensions, compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions(), cmdclass={"build_ext": OptionalBuildExt})
