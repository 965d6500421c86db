from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = cythonize(
    [Extension("qvolume._simplex_core", ["src/qvolume/_simplex_core.pyx"])],
    compiler_directives={"language_level": "3"},
)

setup(ext_modules=extensions)
