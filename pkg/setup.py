import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


class optional_build_ext(build_ext):
    # a failed compile leaves the pure-Python kernels in charge
    def run(self):
        try:
            super().run()
        except Exception as e:
            self.warn(f"compiled kernels not built ({e}); using the pure-Python backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as e:
            self.warn(f"compiled kernels not built ({e}); using the pure-Python backend")


ext_modules = []
if cythonize is not None and not os.environ.get("PARAPLAN_NO_EXT"):
    ext_modules = cythonize(
        [Extension("paraplan._kernels", ["src/paraplan/_kernels.pyx"], extra_compile_args=["-O3"])],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
