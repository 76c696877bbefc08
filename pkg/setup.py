import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python fallback is used at runtime
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("COMMSHAPLEY_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "commshapley._core",
                ["src/commshapley/_core.pyx"],
                # keep IEEE semantics identical to the Python fallback
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
