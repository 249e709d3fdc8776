"""
PRIMERACE CLI - Schema Command

Prints the JSON schema of a report model.
"""

import click

from primerace.cli.cli_utils import emit_json
from primerace.schemas import REPORT_MODELS


@click.command(name="schema")
@click.argument("model", type=click.Choice(sorted(REPORT_MODELS)))
def schema(model):
    """
    JSON schema of a report (pydantic model_json_schema).

    Example:
        primerace schema density
    """
    emit_json(REPORT_MODELS[model].model_json_schema())
