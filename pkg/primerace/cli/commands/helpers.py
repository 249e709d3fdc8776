"""
PRIMERACE CLI - Shared Helper Functions

Option parsing, RunConfig validation and context building used across
commands.
"""

import functools
from typing import Dict, List, Optional, Tuple

import click

from primerace.config import Config
from primerace.schemas import RunConfig
from primerace.spectral import SpectralContext


def parse_int_list(ctx, param, value: Optional[str]) -> Optional[List[int]]:
    """'2,5,11' -> [2, 5, 11]."""
    if value is None:
        return None
    try:
        return [int(part) for part in value.replace(" ", "").split(",") if part]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}")


def parse_count(ctx, param, value: Optional[str]) -> Optional[int]:
    """Integers that may be written in scientific notation: '1e7' -> 10000000."""
    if value is None:
        return None
    try:
        number = float(value)
    except ValueError:
        raise click.BadParameter(f"expected a number, got {value!r}")
    if not number.is_integer():
        raise click.BadParameter(f"expected a whole number, got {value!r}")
    return int(number)


def parse_calibration(ctx, param, values: Tuple[str, ...]) -> Dict[str, float]:
    """('EXTREME_TAU=0.02', ...) -> {'EXTREME_TAU': 0.02}."""
    overrides: Dict[str, float] = {}
    for item in values or ():
        name, sep, raw = item.partition("=")
        if not sep:
            raise click.BadParameter(f"expected NAME=VALUE, got {item!r}")
        try:
            overrides[name.strip().upper()] = float(raw)
        except ValueError:
            raise click.BadParameter(f"calibration value for {name} is not a number: {raw!r}")
    return overrides


def output_option(func):
    return click.option(
        "--output", "-o", type=click.Choice(["json", "csv", "table"]), default="json", show_default=True,
        help="Report format",
    )(func)


def spectral_options(func):
    """--y, --route and --calibrate for commands that build a spectral context."""

    @click.option("--y", "y", callback=parse_count, default=None, help="Smoothing parameter for character sums (default min(max(q^2, 1e6), 4e6))")
    @click.option("--route", type=click.Choice(["residue", "char"]), default=None, help="How B_q is computed (default from config)")
    @click.option("--calibrate", multiple=True, callback=parse_calibration, metavar="NAME=VALUE", help="Override a calibration constant (repeatable)")
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        return func(*args, **kwargs)

    return wrapper


def run_config(command: str, **fields) -> RunConfig:
    """Validate options before dispatch (pydantic ValidationError on failure)."""
    return RunConfig(command=command, **{k: v for k, v in fields.items() if v is not None})


def derive_config(run: RunConfig):
    """Per-run Config subclass carrying the calibration overrides."""
    config = Config.derive("RunConfig", calibration=run.calibration or None)
    config.validate()
    return config


def build_context(run: RunConfig, config, route: Optional[str] = None) -> SpectralContext:
    y = int(run.y) if run.y is not None else None
    return SpectralContext.build(run.q, y=y, route=route, config=config)
