"""
PRIMERACE CLI - Race Command

Sieves to X and reports the logarithmic measure of every ordering.
"""

from pathlib import Path

import click

from primerace.cli.cli_utils import emit, progress_step, reports_errors
from primerace.cli.commands.helpers import derive_config, output_option, parse_count, parse_int_list, run_config
from primerace.race import ordering_measures, race_counts


@click.command(name="race")
@click.option("--q", "q", type=int, required=True, help="Modulus q >= 3")
@click.option("--classes", "entries", required=True, callback=parse_int_list, help="Comma-separated residue classes")
@click.option("--x", "x_max", required=True, callback=parse_count, help="Sieve limit X, e.g. 1e7")
@click.option("--checkpoints", "per_decade", type=int, default=None, help="Checkpoints per decade (default from config)")
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Binary trace file; an existing compatible trace is resumed")
@click.option("--csv-out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Write x,count_a1,...,count_ar to this CSV file")
@click.option("--workers", type=int, default=None, help="Sieve worker threads")
@output_option
@reports_errors
def race(q, entries, x_max, per_decade, trace_path, csv_out, workers, output):
    """
    Empirical race pi(x;q,a_1), ..., pi(x;q,a_r) up to X.

    Examples:
        primerace race --q 4 --classes 3,1 --x 1e7
        primerace race --q 7 --classes 1,2,4 --x 1e8 --trace race7.prtr
    """
    run = run_config("race", q=q, entries=entries, x_max=x_max, output=output)
    config = derive_config(run)
    with progress_step(f"Sieving q={run.q} classes {run.entries} to X={run.x_max}"):
        trace = race_counts(
            run.q, run.entries, run.x_max,
            checkpoints_per_decade=per_decade, trace_path=trace_path, workers=workers, config=config,
        )
    if csv_out is not None:
        trace.to_csv(csv_out)
    measures = ordering_measures(trace)
    payload = measures.to_dict()
    rows = [[o["ordering"], o["measure"], o["lead_changes"]] for o in payload["orderings"]]
    rows.append(["ties", measures.ties, ""])
    emit(output, payload, ["ordering", "measure", "lead_changes"], rows)
