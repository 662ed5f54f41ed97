from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # Pure-python install: the package falls back to the numpy kernel.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "perspex._mc_kernel",
                ["src/perspex/_mc_kernel.pyx"],
                # no -ffast-math / fp contraction: the compiled kernel must
                # take bit-identical hit decisions to the numpy fallback
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
