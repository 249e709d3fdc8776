"""
PRIMERACE CLI - Bias Commands

classify, construct and counterexample.
"""

import click

from primerace.bias import VARIANTS, bias_factor_counterexample, classify_bias, construct_biased_tuple
from primerace.cli.cli_utils import emit, reports_errors
from primerace.cli.commands.helpers import (
    build_context,
    derive_config,
    output_option,
    parse_int_list,
    run_config,
    spectral_options,
)
from primerace.densities import RaceTuple, density_series
from primerace.simplex import coefficient_table


@click.command(name="classify")
@click.option("--q", "q", type=int, required=True, help="Modulus q >= 3")
@click.option("--tuple", "entries", required=True, callback=parse_int_list, help="Comma-separated residues")
@click.option("--margin", is_flag=True, default=False, help="Build the spectral context and report the evaluator margin (r <= 5)")
@spectral_options
@output_option
@reports_errors
def classify(q, entries, margin, y, route, calibrate, output):
    """
    Classify a race as symmetric, unbiased, biased or q-extremely biased.

    Example:
        primerace classify --q 7 --tuple 1,2,4
    """
    run = run_config("classify", q=q, entries=entries, y=y, output=output, calibration=calibrate)
    config = derive_config(run)
    race = RaceTuple.of(run.q, run.entries)
    ctx = build_context(run, config, route) if margin else None
    verdict = classify_bias(race, ctx=ctx, config=config)
    payload = verdict.to_dict()
    emit(output, payload, ["classification", "threshold", "margin", "reasons"],
         [[verdict.classification, verdict.threshold, verdict.margin, list(verdict.reasons)]])


@click.command(name="construct")
@click.option("--q", "q", type=int, required=True, help="Modulus q >= 3")
@click.option("--r", "r", type=int, required=True, help="Number of competitors (>= 3)")
@click.option("--variant", type=click.Choice(VARIANTS), default="mixed", show_default=True, help="Construction")
@click.option("--evaluate", "with_density", is_flag=True, default=False, help="Also evaluate both orders with the series evaluator")
@spectral_options
@output_option
@reports_errors
def construct(q, r, variant, with_density, y, route, calibrate, output):
    """
    An explicit tuple with a large bias of known sign.

    Example:
        primerace construct --q 101 --r 3 --variant mixed
    """
    run = run_config("construct", q=q, r=r, y=y, output=output, calibration=calibrate)
    config = derive_config(run)
    built = construct_biased_tuple(run.q, run.r, variant)
    payload = built.to_dict()
    if with_density:
        ctx = build_context(run, config, route)
        coeffs = coefficient_table(run.r, config=config)
        payload["deviation"] = density_series(ctx, coeffs, built.race).deviation
        payload["swapped_deviation"] = density_series(ctx, coeffs, built.swapped).deviation
    emit(output, payload, ["tuple", "predicted_sign", "swapped", "swapped_sign"],
         [[list(built.race.entries), built.predicted_sign, list(built.swapped.entries), built.swapped_sign]])


@click.command(name="counterexample")
@click.option("--q", "q", type=int, required=True, help="Modulus q >= 3")
@click.option("--kappa", required=True, help="Comma-separated weights kappa_1,...,kappa_r")
@click.option("--evaluate", "with_density", is_flag=True, default=False, help="Also evaluate delta(a) and delta(b)")
@spectral_options
@output_option
@reports_errors
def counterexample(q, kappa, with_density, y, route, calibrate, output):
    """
    Tuples a, b where a linear bias factor and the density disagree.

    Example:
        primerace counterexample --q 10007 --kappa 0,0,1 --evaluate
    """
    try:
        weights = [float(k) for k in kappa.split(",") if k.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {kappa!r}", param_hint="--kappa")
    run = run_config("counterexample", q=q, y=y, output=output, calibration=calibrate)
    config = derive_config(run)
    built = bias_factor_counterexample(run.q, len(weights), weights)
    payload = built.to_dict()
    if with_density:
        ctx = build_context(run, config, route)
        coeffs = coefficient_table(len(weights), config=config)
        payload["delta_a"] = density_series(ctx, coeffs, built.a).delta
        payload["delta_b"] = density_series(ctx, coeffs, built.b).delta
    emit(output, payload, ["case", "a", "b", "kappa_gap"],
         [[built.case, list(built.a.entries), list(built.b.entries), built.kappa_gap()]])
