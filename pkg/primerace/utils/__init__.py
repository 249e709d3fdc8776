"""
PRIMERACE Utilities Package
"""

from .version_gating import is_compatible_writer, is_version_enabled

__all__ = ["is_compatible_writer", "is_version_enabled"]
