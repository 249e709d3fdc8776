"""
PRIMERACE Setup Configuration

Chebyshev bias and prime number races.
"""

from setuptools import setup, find_packages
from pathlib import Path

# Read README for long description
readme_file = Path(__file__).parent / "README.md"
long_description = readme_file.read_text(encoding="utf-8") if readme_file.exists() else ""

setup(
    name="primerace",
    version="0.1.0",
    license="Apache-2.0",
    description="Chebyshev bias and prime number races",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(include=["primerace*"]),
    install_requires=[
        "click>=8.2.0",
        "packaging>=21.0",
        "pydantic>=2.0",
        "numpy>=1.24",
        "scipy>=1.10",
        "sympy>=1.12",
    ],
    extras_require={
        "dotenv": ["python-dotenv>=1.0.0"],
        "dev": [
            "pytest>=7.0.0",
            "hypothesis>=6.80",
            "black>=23.0.0",
            "ruff>=0.1.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "primerace=primerace.cli.main:main",
        ],
    },
    python_requires=">=3.9",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Programming Language :: Python :: 3",
    ],
    keywords="prime-races chebyshev-bias dirichlet-characters number-theory",
)
