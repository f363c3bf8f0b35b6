from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("adrank.kernels._ckern", ["src/adrank/kernels/_ckern.pyx"])],
        language_level=3,
    )
except ImportError:
    # pure-Python install; the numpy kernel backend is used instead
    ext_modules = []

setup(ext_modules=ext_modules)
