"""Builds the optional compiled kernels; the package works without them."""

import os

from setuptools import setup


def _extensions():
    if os.environ.get("GEVREYLAB_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    ext = Extension("gevreylab._ckernels", ["src/gevreylab/_ckernels.pyx"],
                    extra_compile_args=["-O3"])
    return cythonize([ext], language_level=3, quiet=True)


setup(ext_modules=_extensions())
