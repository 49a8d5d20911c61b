from setuptools import Extension, setup
from Cython.Build import cythonize

ext_modules = [
    Extension(
        "pairings._kernels._ckernels",
        ["src/pairings/_kernels/_ckernels.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(ext_modules, language_level=3))
