from setuptools import Extension, setup
from Cython.Build import cythonize

setup(
    ext_modules=cythonize(
        [
            Extension(
                "browniansim._ctkernel",
                ["src/browniansim/_ctkernel.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
)
