"""
PRIMERACE CLI Commands Package

One module per command family.
"""

__all__ = []
