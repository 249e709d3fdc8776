"""
PRIMERACE CLI - Density Command

Evaluates the logarithmic density of a race with any of the evaluators.
"""

import click

from primerace.cli.cli_utils import emit, reports_errors
from primerace.cli.commands.helpers import (
    build_context,
    derive_config,
    output_option,
    parse_count,
    parse_int_list,
    run_config,
    spectral_options,
)
from primerace.densities import METHOD_ALIASES, RaceTuple, all_orderings, evaluate
from primerace.simplex import coefficient_table

HEADERS = ["tuple", "method", "delta", "deviation", "error_budget", "degenerate"]


def _row(report):
    return [list(report.race.entries), report.method, report.delta, report.deviation, report.error_budget, report.degenerate]


@click.command(name="density")
@click.option("--q", "q", type=int, required=True, help="Modulus q >= 3")
@click.option("--tuple", "entries", required=True, callback=parse_int_list, help="Comma-separated residues a_1,...,a_r")
@click.option("--method", "-m", type=click.Choice(sorted(METHOD_ALIASES), case_sensitive=False), default="series",
              show_default=True, help="Evaluator")
@click.option("--all-orders", is_flag=True, default=False, help="Evaluate every ordering of the tuple and their sum")
@click.option("--samples", callback=parse_count, default=None, help="Monte Carlo samples (surrogate only), e.g. 1e7")
@click.option("--seed", type=int, default=None, help="Monte Carlo seed (surrogate only)")
@spectral_options
@output_option
@reports_errors
def density(q, entries, method, all_orders, samples, seed, y, route, calibrate, output):
    """
    Logarithmic density of pi(x;q,a_1) > ... > pi(x;q,a_r).

    Examples:
        primerace density --q 101 --tuple 2,5,11 --method series --all-orders
        primerace density --q 4 --tuple 3,1 --method two-way
        primerace density --q 101 --tuple 2,5,11 --method surrogate --samples 1e7 --seed 7
    """
    run = run_config("density", q=q, entries=entries, y=y, samples=samples, seed=seed, output=output, calibration=calibrate)
    config = derive_config(run)
    race = RaceTuple.of(run.q, run.entries)
    ctx = build_context(run, config, route)
    coeffs = coefficient_table(race.r, config=config)

    if all_orders:
        reports, total = all_orderings(ctx, race, method, coeffs=coeffs, samples=run.samples, seed=run.seed)
        payload = {"reports": [rep.to_dict() for rep in reports], "sum": total}
        rows = [_row(rep) for rep in reports] + [["sum", "", total, "", "", ""]]
        emit(output, payload, HEADERS, rows)
        return

    report = evaluate(ctx, race, method, coeffs=coeffs, samples=run.samples, seed=run.seed)
    emit(output, report.to_dict(), HEADERS, [_row(report)])
