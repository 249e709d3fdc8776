"""
PRIMERACE CLI - Simplex Command

Coefficient tables alpha_j(r), lambda_j(r), beta_jk(r) with their
identity residuals, and Monte Carlo cross-checks.
"""

from dataclasses import asdict
from pathlib import Path

import click

from primerace.cli.cli_utils import emit, reports_errors
from primerace.cli.commands.helpers import derive_config, output_option, parse_count, run_config
from primerace.simplex import check_identities, coefficient_table, export_tables, mc_estimate

HEADERS = ["coefficient", "value", "error"]


@click.command(name="simplex")
@click.option("--r", "r", type=int, required=True, help="Number of competitors (2..8)")
@click.option("--precision", type=float, default=None, help="Quadrature precision target (default from config)")
@click.option("--mc", "which", default=None, metavar="SELECTOR",
              help="Also estimate one coefficient by Monte Carlo: alpha_1, beta_1_2, lambda_sum, ...")
@click.option("--samples", callback=parse_count, default=None, help="Monte Carlo samples, e.g. 1e6")
@click.option("--seed", type=int, default=None, help="Monte Carlo seed")
@click.option("--json-out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Write the table to a JSON file keyed by r")
@output_option
@reports_errors
def simplex(r, precision, which, samples, seed, json_out, output):
    """
    Gaussian simplex coefficients for r competitors.

    Examples:
        primerace simplex --r 3
        primerace simplex --r 4 --mc beta_1_4 --samples 1e6 --seed 1
    """
    run = run_config("simplex", r=r, samples=samples, seed=seed, output=output)
    config = derive_config(run)
    coeffs = coefficient_table(run.r, precision=precision, config=config)
    payload = coeffs.to_dict()
    payload["identities"] = {**asdict(check_identities(coeffs)), "holds": check_identities(coeffs).holds}

    if which is not None:
        estimate = mc_estimate(run.r, which, samples=run.samples, seed=run.seed, config=config)
        payload["monte_carlo"] = {
            "which": estimate.which,
            "estimate": estimate.estimate,
            "std_error": estimate.std_error,
            "samples": estimate.samples,
            "seed": estimate.seed,
        }
    if json_out is not None:
        export_tables([coeffs], json_out)

    rows = []
    for name in ("alpha", "lambda", "beta"):
        for entry in payload[name]:
            label = f"{name}_{entry['j']}" + (f"_{entry['k']}" if "k" in entry else "")
            rows.append([label, entry["value"], entry["error"]])
    emit(output, payload, HEADERS, rows)
