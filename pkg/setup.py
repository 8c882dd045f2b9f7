from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # fallback kernel is used at import time
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("photeleport._wick", ["src/photeleport/_wick.pyx"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
