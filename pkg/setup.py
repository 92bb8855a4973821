"""Build script: compiles the optional geometry kernel extension.

The package is fully functional without the extension (a numpy fallback is
selected at import); building it just makes the O(N^2) geometry kernels fast
and exactly rounded. Cython + a C compiler are required to build it, so the
extension is marked optional and any build failure degrades gracefully.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "ascprobe.geometry._ckern",
                ["src/ascprobe/geometry/_ckern.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
