"""
PRIMERACE CLI Commands

Prime number races from the command line: densities, spectral sums,
simplex coefficients, biased constructions and sieved races.
"""

import sys

import click
from pydantic import ValidationError

from primerace.cli.cli_utils import CLIError, handle_error
from primerace.cli.commands.bias_commands import classify, construct, counterexample
from primerace.cli.commands.density_command import density
from primerace.cli.commands.race_command import race
from primerace.cli.commands.schema_command import schema
from primerace.cli.commands.simplex_command import simplex
from primerace.cli.commands.spectral_commands import avg_bq, bq, nq
from primerace.cli.utils.logging_config import setup_run_logging
from primerace.config import Config
from primerace.errors import PrimeRaceError
from primerace.logging import setup_logging


def _version_callback(ctx, param, value):
    """Display version."""
    if value:
        from primerace import __version__
        click.echo(f'primerace v{__version__}')
        ctx.exit()


@click.group()
@click.option('--version', '-V', is_flag=True, callback=_version_callback, expose_value=False, is_eager=True, help='Show version and exit')
@click.option('--log-level', default=None, type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False),
              help='Console log level (default WARNING)')
@click.pass_context
def cli(ctx, log_level):
    """
    primerace - Chebyshev bias and prime number races

    Densities of races among residue classes, the spectral sums they depend
    on, explicit biased tuples and sieved empirical races.
    """
    Config.load_from_env()
    setup_logging(log_level or "WARNING", stream=sys.stderr)
    try:
        setup_run_logging(level=Config.LOG_LEVEL)
    except Exception as e:
        click.secho(f"Warning: Could not initialize run logging: {e}", fg='yellow', err=True)


cli.add_command(density)
cli.add_command(bq)
cli.add_command(nq)
cli.add_command(avg_bq)
cli.add_command(simplex)
cli.add_command(construct)
cli.add_command(classify)
cli.add_command(counterexample)
cli.add_command(race)
cli.add_command(schema)


def main():
    """Main entry point with global exception handling."""
    try:
        cli()
    except (CLIError, PrimeRaceError, ValidationError) as e:
        handle_error(e)
        sys.exit(1)
    except KeyboardInterrupt:
        click.echo("\n\n[CANCELLED] Operation cancelled by user.", err=True)
        sys.exit(130)


if __name__ == '__main__':
    main()
