"""Package setup."""

import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="diracpair",
    version="0.1.0",
    author="diracpair developers",
    description="Dirac structures, dual pairs and their realizations",
    long_description=long_description,
    long_description_content_type="text/markdown",
    package_data={"diracpair": ["py.typed", "tools/corpus/*.json"]},
    packages=setuptools.find_packages(exclude=["examples", "examples.*"]),
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
    install_requires=[
        "numpy",
        "pandas",
        "pydantic<2",
        "pyparsing>=3",
        "PyYAML",
        "scipy",
        "sympy",
        "tabulate",
        "tqdm",
        "toml",
    ],
    entry_points={
        "console_scripts": ["diracctl = diracpair.tools.diracctl:main"]
    },
    include_package_data=True,
)
