"""
PRIMERACE CLI - Spectral Commands

N_q, B_q(a, b) and the average of B_q over all pairs.
"""

import math
from pathlib import Path

import click

from primerace.arith import phi
from primerace.cli.cli_utils import CLIError, emit, reports_errors
from primerace.cli.commands.helpers import build_context, derive_config, output_option, run_config, spectral_options
from primerace.spectral import (
    all_b_values,
    average_b,
    b_q_char_route,
    b_q_residue_route,
    export_b_matrix,
    n_q,
    small_b_residual,
)

B_HEADERS = ["a", "b", "B", "route", "error_budget"]


@click.command(name="nq")
@click.option("--q", "q", type=int, required=True, help="Modulus q >= 3")
@spectral_options
@output_option
@reports_errors
def nq(q, y, route, calibrate, output):
    """
    N_q: the sum over the zeros of all non-principal L-functions mod q.

    Example:
        primerace nq --q 1009
    """
    run = run_config("nq", q=q, y=y, output=output, calibration=calibrate)
    config = derive_config(run)
    estimate = n_q(run.q, int(run.y) if run.y else None, config=config)
    phi_q = phi(run.q)
    payload = {
        "q": run.q,
        "phi": phi_q,
        "y": estimate.y,
        "n_q": estimate.value,
        "error_budget": estimate.error_budget,
        "n_q_over_phi_log_q": estimate.value / (phi_q * math.log(run.q)),
    }
    emit(output, payload, list(payload), [list(payload.values())])


@click.command(name="bq")
@click.option("--q", "q", type=int, required=True, help="Modulus q >= 3")
@click.option("--a", "a", type=int, default=None, help="First residue")
@click.option("--b", "b", type=int, default=None, help="Second residue")
@click.option("--scan-all", is_flag=True, default=False, help="Every ordered pair of distinct reduced residues")
@click.option("--csv-out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="With --scan-all, write the B matrix to this CSV file")
@click.option("--explain", is_flag=True, default=False, help="Add the small-residue prediction and the other route")
@spectral_options
@output_option
@reports_errors
def bq(q, a, b, scan_all, csv_out, explain, y, route, calibrate, output):
    """
    B_q(a, b): the character-twisted zero sum for a pair of residues.

    Examples:
        primerace bq --q 101 --a 1 --b 100 --explain
        primerace bq --q 12 --scan-all --output csv
    """
    if not scan_all and (a is None or b is None):
        raise CLIError("Give --a and --b, or --scan-all", suggestion="primerace bq --q 101 --a 1 --b 2", error_code="E002")
    entries = [] if scan_all else [a, b]
    run = run_config("bq", q=q, entries=entries, y=y, output=output, calibration=calibrate)
    config = derive_config(run)
    ctx = build_context(run, config, route)

    if scan_all:
        if csv_out is not None:
            export_b_matrix(ctx, csv_out)
        values = all_b_values(ctx)
        payload = {"q": ctx.q, "route": ctx.route, "values": [dict(zip(B_HEADERS, v.as_row())) for v in values]}
        emit(output, payload, B_HEADERS, [v.as_row() for v in values])
        return

    value = ctx.b(a, b)
    payload = {
        "q": ctx.q, "a": value.a, "b": value.b, "value": value.value,
        "route": value.route, "error_budget": value.error_budget,
    }
    if explain:
        small = small_b_residual(ctx, value.a, value.b)
        payload["predicted_small"] = small.predicted
        payload["small_residual"] = small.to_dict()
        other = b_q_residue_route(ctx.q, value.a, value.b, config=config) if ctx.route == "char" else b_q_char_route(ctx, value.a, value.b)
        payload["other_route"] = {"route": other.route, "value": other.value, "error_budget": other.error_budget}
    emit(output, payload, B_HEADERS, [value.as_row()])


@click.command(name="avg-bq")
@click.option("--q", "q", type=int, required=True, help="Modulus q >= 3")
@spectral_options
@output_option
@reports_errors
def avg_bq(q, y, route, calibrate, output):
    """
    Mean of B_q and |B_q| over all ordered pairs of distinct reduced residues.

    Example:
        primerace avg-bq --q 211
    """
    run = run_config("avg-bq", q=q, y=y, output=output, calibration=calibrate)
    config = derive_config(run)
    ctx = build_context(run, config, route or "residue")
    average = average_b(ctx)
    payload = {
        "q": ctx.q,
        "route": average.route,
        "pairs": average.pairs,
        "mean": average.mean,
        "mean_abs": average.mean_abs,
        "ratio_to_log_q": average.ratio_to_log_q,
        "expected_mean": -ctx.n_q / (ctx.phi - 1),
    }
    emit(output, payload, list(payload), [list(payload.values())])
