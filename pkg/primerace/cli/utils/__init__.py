"""PRIMERACE CLI utilities."""

from primerace.cli.utils.logging_config import setup_run_logging

__all__ = ["setup_run_logging"]
