# setup.py

from setuptools import setup, find_packages

setup(
    name="strongdom",
    version="0.1.0",
    packages=find_packages(exclude=("tests", "tests.*")),
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.26",
        "pandas>=2.2",
        "python-dotenv>=1.0",
        "pyyaml>=6.0",
    ],
    entry_points={"console_scripts": ["strongdom=src.cli:run_main"]},
)
