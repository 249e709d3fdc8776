"""
Tests for the primerace command line
"""

import json
import math

import pytest
from click.testing import CliRunner

from primerace.cli import cli


@pytest.fixture
def runner():
    return CliRunner()


def _json(result):
    assert result.exit_code == 0, result.output
    return json.loads(result.stdout)


def test_version(runner):
    from primerace import __version__

    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_simplex_three(runner):
    payload = _json(runner.invoke(cli, ["simplex", "--r", "3"]))
    assert payload["method"] == "closed-form"
    assert payload["alpha"][0]["value"] == pytest.approx(1 / (4 * math.sqrt(math.pi)))
    assert payload["identities"]["holds"] is True


def test_simplex_monte_carlo_and_export(runner, tmp_path):
    out = tmp_path / "r2.json"
    payload = _json(runner.invoke(cli, [
        "simplex", "--r", "2", "--mc", "alpha_1", "--samples", "1e5", "--seed", "4", "--json-out", str(out),
    ]))
    assert payload["monte_carlo"]["samples"] == 100000
    assert payload["monte_carlo"]["seed"] == 4
    assert "2" in json.loads(out.read_text())


def test_simplex_csv(runner):
    result = runner.invoke(cli, ["simplex", "--r", "2", "--output", "csv"])
    assert result.exit_code == 0
    lines = result.stdout.strip().splitlines()
    assert lines[0] == "coefficient,value,error"
    assert lines[1].startswith("alpha_1,")


def test_construct(runner):
    payload = _json(runner.invoke(cli, ["construct", "--q", "101", "--r", "3"]))
    assert payload["tuple"] == [1, 24, 100]
    assert payload["swapped"] == [24, 1, 100]
    assert payload["predicted_sign"] == 1


def test_construct_with_evaluation(runner):
    payload = _json(runner.invoke(cli, ["construct", "--q", "101", "--r", "3", "--evaluate"]))
    assert payload["deviation"] > 0
    assert payload["swapped_deviation"] < 0


def test_classify(runner):
    payload = _json(runner.invoke(cli, ["classify", "--q", "7", "--tuple", "1,2,4"]))
    assert payload["classification"] == "symmetric-unbiased-candidate"
    payload = _json(runner.invoke(cli, ["classify", "--q", "101", "--tuple", "1,100,5"]))
    assert payload["classification"] == "q-extreme-predicted"
    assert payload["witness"]["kind"] == "opposite-pair"


def test_counterexample(runner):
    payload = _json(runner.invoke(cli, ["counterexample", "--q", "101", "--kappa", "0,0,1"]))
    assert payload["a"] == [1, 48, 23]
    assert payload["b"] == [1, 48, 2]
    assert payload["kappa_gap"] == 2


def test_density_two_way(runner):
    payload = _json(runner.invoke(cli, ["density", "--q", "4", "--tuple", "3,1", "--method", "two-way"]))
    assert payload["method"] == "two_way"
    assert payload["delta"] > 0.5


def test_density_all_orders(runner):
    payload = _json(runner.invoke(cli, ["density", "--q", "101", "--tuple", "2,5,11", "--all-orders"]))
    assert len(payload["reports"]) == 6
    assert payload["sum"] == pytest.approx(1.0, abs=1e-10)


def test_density_alias_and_table(runner):
    result = runner.invoke(cli, ["density", "--q", "101", "--tuple", "2,5,11", "-m", "three-way", "-o", "table"])
    assert result.exit_code == 0
    assert "three_way" in result.stdout


def test_bq_explain(runner):
    payload = _json(runner.invoke(cli, ["bq", "--q", "101", "--a", "1", "--b", "100", "--explain"]))
    assert payload["value"] < -40
    assert payload["predicted_small"] == pytest.approx(-100 * math.log(2))
    assert payload["small_residual"]["within_bound"] is True
    assert payload["small_residual"]["bound"] == pytest.approx(30.0 * math.log(101) ** 2)
    assert payload["other_route"]["route"] == "char"


def test_bq_scan_all_csv(runner, tmp_path):
    out = tmp_path / "b12.csv"
    result = runner.invoke(cli, ["bq", "--q", "12", "--y", "2000", "--scan-all", "--csv-out", str(out), "-o", "csv"])
    assert result.exit_code == 0, result.output
    assert len(result.stdout.strip().splitlines()) == 1 + 12
    assert out.read_text().startswith("a,b,B,route,error_budget")


def test_nq(runner):
    payload = _json(runner.invoke(cli, ["nq", "--q", "4"]))
    assert payload["n_q"] == pytest.approx(1.30, abs=0.05)


def test_race(runner, tmp_path):
    out = tmp_path / "race.csv"
    payload = _json(runner.invoke(cli, ["race", "--q", "4", "--classes", "3,1", "--x", "1e5", "--csv-out", str(out)]))
    assert payload["x_max"] == 100000
    assert payload["total"] == pytest.approx(1.0, abs=1e-9)
    assert payload["orderings"][0]["ordering"] == [3, 1]
    assert out.exists()


def test_schema(runner):
    payload = _json(runner.invoke(cli, ["schema", "density"]))
    assert "delta" in payload["properties"]


@pytest.mark.parametrize("args", [
    ["density", "--q", "2", "--tuple", "1,3"],
    ["density", "--q", "101", "--tuple", "1,102"],
    ["density", "--q", "4", "--tuple", "1,2"],
    ["simplex", "--r", "9"],
    ["construct", "--q", "101", "--r", "2"],
    ["bq", "--q", "101"],
    ["density", "--q", "101", "--tuple", "2,5,11", "--calibrate", "NOPE=1"],
])
def test_invalid_input_exits_with_one(runner, args):
    result = runner.invoke(cli, args)
    assert result.exit_code == 1
    assert "[ERROR" in result.stderr


def test_bad_option_value_is_a_usage_error(runner):
    result = runner.invoke(cli, ["density", "--q", "101", "--tuple", "a,b"])
    assert result.exit_code == 2


@pytest.mark.slow
def test_avg_bq(runner):
    payload = _json(runner.invoke(cli, ["avg-bq", "--q", "211"]))
    assert payload["pairs"] == 210 * 209
    assert 0.5 <= payload["ratio_to_log_q"] <= 12
