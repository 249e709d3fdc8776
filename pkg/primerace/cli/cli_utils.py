"""
PRIMERACE CLI - Utilities

Error rendering, report emission and progress lines for CLI commands.
Reports go to stdout; diagnostics and progress go to stderr.
"""

import functools
import json
import sys
from contextlib import contextmanager
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence

import click
from pydantic import ValidationError

from primerace.errors import PrimeRaceError


class CLIError(Exception):
    """
    Custom exception for CLI errors with actionable suggestions.

    Attributes:
        message: Error message
        suggestion: Actionable suggestion for the user
        error_code: Optional error code for documentation reference
    """

    def __init__(self, message: str, suggestion: str = None, error_code: str = None):
        self.message = message
        self.suggestion = suggestion
        self.error_code = error_code
        super().__init__(message)


def _tip(text: str) -> None:
    click.secho("[TIP] ", fg='yellow', bold=True, nl=False, err=True)
    click.secho(text, fg='yellow', err=True)


def handle_error(error: Exception, context: str = None):
    """
    Render an error with its code and suggestion on stderr.

    Args:
        error: The exception that occurred
        context: Optional context about what operation failed
    """
    if isinstance(error, (CLIError, PrimeRaceError)):
        if error.error_code:
            click.secho(f"[ERROR {error.error_code}] ", fg='red', bold=True, nl=False, err=True)
        else:
            click.secho("[ERROR] ", fg='red', bold=True, nl=False, err=True)
        click.secho(error.message, fg='red', err=True)
        if error.suggestion:
            _tip(error.suggestion)

    elif isinstance(error, ValidationError):
        click.secho("[ERROR V001] ", fg='red', bold=True, nl=False, err=True)
        click.secho(f"Invalid options ({error.error_count()} problem(s))", fg='red', err=True)
        for item in error.errors():
            where = ".".join(str(part) for part in item.get("loc", ())) or "options"
            click.secho(f"  {where}: {item.get('msg')}", fg='red', err=True)
        _tip("Run the command with --help to see the accepted values.")

    elif isinstance(error, FileNotFoundError):
        click.secho("[ERROR] ", fg='red', bold=True, nl=False, err=True)
        click.secho(f"File not found: {error.filename or error}", fg='red', err=True)
        _tip("Check that the file path is correct and the file exists.")

    elif isinstance(error, PermissionError):
        click.secho("[ERROR] ", fg='red', bold=True, nl=False, err=True)
        click.secho(f"Permission denied: {error.filename or error}", fg='red', err=True)
        _tip("Check file permissions or choose another output path.")

    else:
        click.secho("[ERROR] ", fg='red', bold=True, nl=False, err=True)
        if context:
            click.secho(f"{context}: {error}", fg='red', err=True)
        else:
            click.secho(str(error), fg='red', err=True)


def reports_errors(func: Callable) -> Callable:
    """Turn domain and validation errors into a rendered message and exit code 1."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (CLIError, PrimeRaceError, ValidationError, OSError) as e:
            handle_error(e)
            sys.exit(1)

    return wrapper


def emit_json(payload: Any) -> None:
    click.echo(json.dumps(payload, indent=2, default=float))


def emit_table(headers: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """Fixed-width table on stdout."""
    rows = [[_cell(v) for v in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    click.secho("  ".join(h.ljust(w) for h, w in zip(headers, widths)), bold=True)
    click.echo("  ".join("-" * w for w in widths))
    for row in rows:
        click.echo("  ".join(c.ljust(w) for c, w in zip(row, widths)))


def emit_csv(headers: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    click.echo(",".join(headers))
    for row in rows:
        click.echo(",".join(_cell(v) for v in row))


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, (list, tuple)):
        return " ".join(str(v) for v in value)
    return str(value)


def emit(output: str, payload: Dict, headers: Optional[List[str]] = None, rows: Optional[List[Sequence[Any]]] = None) -> None:
    """Emit ``payload`` as JSON, or ``rows`` as a table/CSV."""
    if output == "json" or rows is None:
        emit_json(payload)
    elif output == "csv":
        emit_csv(headers, rows)
    else:
        emit_table(headers, rows)


@contextmanager
def progress_step(message: str):
    """
    One progress line on stderr.

    Usage:
        with progress_step("Sieving to 1e7"):
            trace = race_counts(...)
    """
    click.secho(f"  [....] {message}", fg='blue', nl=False, err=True)
    try:
        yield
        click.echo('\r', nl=False, err=True)
        click.secho(f"  [ OK ] {message}", fg='green', err=True)
    except Exception:
        click.echo('\r', nl=False, err=True)
        click.secho(f"  [FAIL] {message}", fg='red', err=True)
        raise
