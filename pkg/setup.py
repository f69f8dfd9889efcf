import numpy as np
from setuptools import setup
from setuptools.extension import Extension

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "tendonwalk.plant._core",
                ["src/tendonwalk/plant/_core.pyx"],
                include_dirs=[np.get_include()],
                # -O0 keeps the compiled kernel bit-for-bit identical to the
                # pure-Python reference (gcc -O1+ reorders FP ops); the
                # typed loop is still ~50x faster than the fallback
                extra_compile_args=["-O0", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Package still works without the compiled stepper; the pure-Python
    # fallback is selected at import time.
    extensions = []

setup(ext_modules=extensions)
