"""Builds the optional compiled community-assignment kernel.

The package is fully functional without it: mdforge.clustering falls back to
the numpy implementation when the extension is missing or fails to build.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext = Extension(
        "mdforge._community_core",
        sources=["src/mdforge/_community_core.pyx"],
        optional=True,
    )
    ext_modules = cythonize(
        [ext],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": "3",
        },
    )

setup(ext_modules=ext_modules)
