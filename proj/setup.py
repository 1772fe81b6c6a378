from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "pcmdp._pcmdp",
    sources=[
        "src/core.cpp",
        "src/estimation.cpp",
        "src/environments.cpp",
        "src/algorithms.cpp",
        "src/oracle.cpp",
        "src/harness.cpp",
        "src/bindings.cpp",
    ],
    include_dirs=["include", "vendor"],
    cxx_std=20,
    extra_compile_args=["-O2"],
)

setup(
    name="pcmdp",
    version="0.1.0",
    description="Tabular RL with factored controllable/exogenous dynamics",
    packages=["pcmdp"],
    package_dir={"pcmdp": "python/pcmdp"},
    ext_modules=[ext],
    cmdclass={"build_ext": build_ext},
    python_requires=">=3.9",
)
