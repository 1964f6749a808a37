"""Build the optional compiled core.

A failed compile is not fatal: ``kernlin`` falls back to ``kernlin._pycore``.
"""
from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:  # no build toolchain, pure-python install
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "kernlin._ccore",
                ["src/kernlin/_ccore.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # no -ffast-math / -march: the streams must stay reproducible
                extra_compile_args=["-O3", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
