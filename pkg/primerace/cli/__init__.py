"""
PRIMERACE CLI Module

Command-line interface for prime race computations.
"""

from primerace.cli.main import cli

__all__ = ["cli"]
