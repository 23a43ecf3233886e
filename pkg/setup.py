import sys

from setuptools import setup, Extension
from Cython.Build import cythonize

extra_compile_args = []
if sys.platform == "darwin":
    extra_compile_args = ["-Wno-unreachable-code"]
elif sys.platform != "win32":
    extra_compile_args = ["-O3"]

# The Sturm-count kernel is optional at runtime: sbt_ilc.eigen falls back to
# a pure-Python loop when the extension is missing.
ext_modules = [
    Extension(
        "sbt_ilc._sturm",
        sources=["src/sbt_ilc/_sturm.pyx"],
        extra_compile_args=extra_compile_args,
    ),
]

setup(ext_modules=cythonize(ext_modules))
