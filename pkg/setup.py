"""Build the optional compiled beam-search kernel.

The package works without it (pure-Python search is selected at import
time); any failure to compile is downgraded to a warning.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        "src/synkw/_beam.pyx",
        language_level=3,
        compiler_directives={"boundscheck": False, "wraparound": False},
    )
except Exception as exc:  # noqa: BLE001 - pure fallback is fine
    print(f"warning: compiled kernel disabled ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
