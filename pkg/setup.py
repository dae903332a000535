from setuptools import Extension, setup

try:
  from Cython.Build import cythonize
except ImportError:
  # Without Cython the package installs pure-Python and uses the numpy kernels.
  ext_modules = []
else:
  ext_modules = cythonize(
      [Extension("cfrpsro._ckernels", ["src/cfrpsro/_ckernels.pyx"],
                 extra_compile_args=["-O3"])],
      language_level=3,
  )

setup(ext_modules=ext_modules)
