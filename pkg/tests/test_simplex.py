"""
Unit tests for the simplex coefficient tables and their Monte Carlo estimates
"""

import json
import math

import numpy as np
import pytest

from primerace.config import Config
from primerace.errors import DomainError
from primerace.simplex import check_identities, coefficient_table, export_tables, mc_estimate


def test_closed_forms_for_three(coeffs3):
    a1 = 1.0 / (4.0 * math.sqrt(math.pi))
    b12 = 1.0 / (4.0 * math.pi * math.sqrt(3.0))
    assert coeffs3.method == "closed-form"
    assert coeffs3.alpha == pytest.approx([a1, 0.0, -a1])
    assert coeffs3.beta[0, 1] == pytest.approx(b12)
    assert coeffs3.beta[1, 2] == pytest.approx(b12)
    assert coeffs3.beta[0, 2] == pytest.approx(-2.0 * b12)


def test_closed_forms_for_two():
    table = coefficient_table(2)
    assert table.alpha == pytest.approx([1.0 / (2.0 * math.sqrt(math.pi)), -1.0 / (2.0 * math.sqrt(math.pi))])
    # max^2 and min^2 of two standard normals share a distribution
    assert table.lam == pytest.approx([0.0, 0.0], abs=1e-9)


@pytest.mark.parametrize("r", [2, 3, 4, 5, 6])
def test_identities_hold(r):
    residuals = check_identities(coefficient_table(r))
    assert residuals.holds, residuals


@pytest.mark.parametrize("r", [3, 4, 5, 6])
def test_outer_beta_signs_clear_their_error(r):
    table = coefficient_table(r)
    first_last, first_last_err = table.beta[0, r - 1], table.beta_err[0, r - 1]
    last_pair, last_pair_err = table.beta[r - 2, r - 1], table.beta_err[r - 2, r - 1]
    assert first_last + 5 * first_last_err < 0
    assert last_pair - 5 * last_pair_err > 0


def test_beta_1_3_sign_from_monte_carlo():
    estimate = mc_estimate(3, "beta_1_3", samples=200_000, seed=13)
    assert estimate.estimate + 5 * estimate.std_error < 0


def test_quadrature_table_shape():
    table = coefficient_table(4)
    assert table.method == "quadrature"
    assert table.alpha[0] > table.alpha[1] > 0 > table.alpha[2] > table.alpha[3]
    assert table.max_error <= 1e-9
    assert np.all(np.tril(table.beta) == 0)


def test_to_dict_layout():
    payload = coefficient_table(4).to_dict()
    assert [entry["j"] for entry in payload["alpha"]] == [1, 2, 3, 4]
    assert len(payload["beta"]) == 6
    assert payload["beta"][0]["k"] == 2


@pytest.mark.parametrize("which,exact", [
    ("alpha_1", 1.0 / (4.0 * math.sqrt(math.pi))),
    ("beta_1_3", -2.0 / (4.0 * math.pi * math.sqrt(3.0))),
    ("lambda_sum", 0.0),
    ("beta_sum", 0.0),
])
def test_monte_carlo_agrees_with_closed_forms(which, exact):
    estimate = mc_estimate(3, which, samples=200_000, seed=11)
    assert abs(estimate.estimate - exact) <= 5 * estimate.std_error + 1e-12
    assert estimate.samples == 200_000


def test_monte_carlo_agrees_with_quadrature():
    table = coefficient_table(4)
    estimate = mc_estimate(4, "beta_1_2", samples=200_000, seed=3)
    assert abs(estimate.estimate - table.beta[0, 1]) <= 5 * estimate.std_error + table.beta_err[0, 1]


def test_seed_fixes_result_regardless_of_workers():
    small_chunks = Config.derive("SmallChunks", MC_CHUNK=2 ** 13)
    one = mc_estimate(3, "alpha_2", samples=60_000, seed=5, workers=1, config=small_chunks)
    many = mc_estimate(3, "alpha_2", samples=60_000, seed=5, workers=4, config=small_chunks)
    assert one.estimate == many.estimate
    assert one.std_error == many.std_error
    other = mc_estimate(3, "alpha_2", samples=60_000, seed=6, workers=4, config=small_chunks)
    assert other.estimate != one.estimate


def test_monte_carlo_rejects_bad_input():
    with pytest.raises(DomainError):
        mc_estimate(3, "alpha_1", samples=100)
    with pytest.raises(DomainError):
        mc_estimate(3, "gamma_1", samples=10_000)
    with pytest.raises(DomainError):
        mc_estimate(3, "beta_3_1", samples=10_000)
    with pytest.raises(DomainError):
        mc_estimate(3, "alpha_4", samples=10_000)


@pytest.mark.parametrize("r", [1, 9])
def test_r_out_of_range(r):
    with pytest.raises(DomainError):
        coefficient_table(r)


def test_export_tables(tmp_path):
    path = export_tables([coefficient_table(2), coefficient_table(3)], tmp_path / "tables.json")
    payload = json.loads(path.read_text())
    assert sorted(payload) == ["2", "3"]
    assert payload["3"]["method"] == "closed-form"
