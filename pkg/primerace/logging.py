"""
PRIMERACE Logging Utilities

Simple logging setup using Python's standard logging library, plus a
structured run-event logger for cache, sieve and report events.

Usage:
    from primerace.logging import get_logger

    logger = get_logger(__name__)
    logger.info("Building context")
"""

import json
import logging
import sys
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Dict, Optional

LOG_FORMAT = '[%(asctime)s] %(levelname)-8s | %(name)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def get_logger(name: str = "primerace", level: str = "INFO", stream=None) -> logging.Logger:
    """
    Get a configured logger instance.

    Args:
        name: Logger name (typically __name__ or module name)
        level: Log level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        stream: Handler stream (stdout by default)

    Returns:
        Configured logging.Logger instance
    """
    logger = logging.getLogger(name)

    # Only configure if not already configured
    if not logger.handlers:
        handler = logging.StreamHandler(stream or sys.stdout)
        handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
        logger.addHandler(handler)
        logger.setLevel(getattr(logging, level.upper()))

    return logger


def setup_logging(
    level: str = "INFO",
    format_string: Optional[str] = None,
    date_format: Optional[str] = None,
    stream=None,
):
    """
    Configure logging globally.

    Args:
        level: Log level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        format_string: Custom log format
        date_format: Custom date format
        stream: Target stream (stdout by default; the CLI passes stderr)
    """
    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format=format_string or LOG_FORMAT,
        datefmt=date_format or DATE_FORMAT,
        stream=stream or sys.stdout,
        force=True  # Reset any existing configuration
    )


# =============================================================================
# Run events
# =============================================================================


class RunEventType(Enum):
    """Run event types for structured logging."""
    # Cache events
    CACHE_HIT = "cache_hit"
    CACHE_MISS = "cache_miss"
    CACHE_WRITE = "cache_write"
    CACHE_REJECTED = "cache_rejected"

    # Computation events
    CONTEXT_BUILT = "context_built"
    SIEVE_PROGRESS = "sieve_progress"
    TRACE_CHECKPOINT = "trace_checkpoint"
    DEGENERATE_REPORT = "degenerate_report"
    CONSTRUCTION_ADJUSTED = "construction_adjusted"
    CALIBRATION_CHECK = "calibration_check"


class RunLogger:
    """
    Structured logger for computation events.

    Each event is one JSON line: timestamp, event_type, severity, message
    and a details dict. Severity maps onto logging levels (WARNING ->
    warning, ERROR -> error, anything else -> info/debug).

    Usage:
        from primerace.logging import run_logger

        run_logger.cache_hit(path, q=101, y=10**6)
        run_logger.degenerate(q=7, method="series", budget=0.4)
    """

    def __init__(self, name: str = "primerace.run"):
        self._logger = logging.getLogger(name)

    def _create_event(
        self,
        event_type: RunEventType,
        severity: str,
        message: str,
        details: Optional[Dict[str, Any]] = None
    ) -> Dict[str, Any]:
        """Create a structured run event."""
        return {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "event_type": event_type.value,
            "severity": severity,
            "message": message,
            "details": details or {},
        }

    def _log_event(
        self,
        event_type: RunEventType,
        severity: str,
        message: str,
        details: Optional[Dict[str, Any]] = None
    ) -> None:
        """Log a run event."""
        event_json = json.dumps(self._create_event(event_type, severity, message, details), default=str)

        if severity == "ERROR":
            self._logger.error(event_json)
        elif severity == "WARNING":
            self._logger.warning(event_json)
        elif severity == "DEBUG":
            self._logger.debug(event_json)
        else:
            self._logger.info(event_json)

    # Cache events
    def cache_hit(self, path, **extra) -> None:
        self._log_event(RunEventType.CACHE_HIT, "DEBUG", f"Cache hit: {path}", {"path": path, **extra})

    def cache_miss(self, path, **extra) -> None:
        self._log_event(RunEventType.CACHE_MISS, "DEBUG", f"Cache miss: {path}", {"path": path, **extra})

    def cache_write(self, path, records: int, **extra) -> None:
        self._log_event(
            RunEventType.CACHE_WRITE,
            "INFO",
            f"Cache written: {path}",
            {"path": path, "records": records, **extra}
        )

    def cache_rejected(self, path, reason: str, **extra) -> None:
        """Log a cache file that could not be used; it will be recomputed."""
        self._log_event(
            RunEventType.CACHE_REJECTED,
            "WARNING",
            f"Cache rejected ({reason}): {path}",
            {"path": path, "reason": reason, **extra}
        )

    # Computation events
    def context_built(self, q: int, route: str, **extra) -> None:
        self._log_event(
            RunEventType.CONTEXT_BUILT,
            "INFO",
            f"Spectral context built for q={q}",
            {"q": q, "route": route, **extra}
        )

    def sieve_progress(self, done: int, total: int, **extra) -> None:
        self._log_event(
            RunEventType.SIEVE_PROGRESS,
            "DEBUG",
            f"Sieved up to {done} of {total}",
            {"done": done, "total": total, **extra}
        )

    def trace_checkpoint(self, path, x_done: int, **extra) -> None:
        self._log_event(
            RunEventType.TRACE_CHECKPOINT,
            "DEBUG",
            f"Trace persisted at x={x_done}",
            {"path": path, "x_done": x_done, **extra}
        )

    def degenerate(self, q: int, method: str, budget: float, **extra) -> None:
        self._log_event(
            RunEventType.DEGENERATE_REPORT,
            "WARNING",
            f"Degenerate {method} report for q={q}: budget {budget:.3g} exceeds the baseline",
            {"q": q, "method": method, "budget": budget, **extra}
        )

    def construction_adjusted(self, q: int, variant: str, adjustments, **extra) -> None:
        self._log_event(
            RunEventType.CONSTRUCTION_ADJUSTED,
            "INFO",
            f"Construction {variant} for q={q} re-selected exponents",
            {"q": q, "variant": variant, "adjustments": adjustments, **extra}
        )

    def calibration_check(self, name: str, observed: float, bound: float, **extra) -> None:
        severity = "WARNING" if observed > bound else "DEBUG"
        self._log_event(
            RunEventType.CALIBRATION_CHECK,
            severity,
            f"{name}: observed {observed:.6g} against bound {bound:.6g}",
            {"name": name, "observed": observed, "bound": bound, **extra}
        )


# Default loggers
# Library output goes to stderr so CLI reports on stdout stay machine-readable
primerace_logger = get_logger("primerace", level="WARNING", stream=sys.stderr)
run_logger = RunLogger()


__all__ = [
    'get_logger',
    'setup_logging',
    'primerace_logger',
    'RunLogger',
    'RunEventType',
    'run_logger',
]
