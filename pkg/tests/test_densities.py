"""
Unit tests for the density evaluators
"""

import math

import pytest

from primerace.densities import (
    RaceTuple,
    all_orderings,
    density_first_order,
    density_same_type,
    density_series,
    density_three_way,
    density_two_way,
    evaluate,
    marginalize_check,
    resolve_method,
    surrogate_density_mc,
)
from primerace.errors import DomainError
from primerace.simplex import coefficient_table


class TestRaceTuple:
    """Validation of race tuples"""

    def test_entries_are_reduced(self):
        race = RaceTuple.of(101, [-1, 2, 105])
        assert race.entries == (100, 2, 4)
        assert race.signed == (-1, 2, 4)
        assert race.r == 3

    def test_too_few_entries(self):
        with pytest.raises(DomainError):
            RaceTuple.of(101, [5])

    def test_duplicates_mod_q(self):
        with pytest.raises(DomainError):
            RaceTuple.of(101, [1, 102])

    def test_non_unit(self):
        with pytest.raises(DomainError):
            RaceTuple.of(4, [1, 2])

    def test_more_entries_than_classes(self):
        with pytest.raises(DomainError):
            RaceTuple.of(4, [1, 3, 5])

    def test_square_types(self):
        assert RaceTuple.of(101, [1, 24, 9]).same_type
        assert RaceTuple.of(101, [2, 3, 8]).same_type
        assert not RaceTuple.of(101, [1, 2, 4]).same_type
        assert RaceTuple.of(101, [1, 2]).c_values == (1, -1)

    def test_permuted_and_reversed(self):
        race = RaceTuple.of(101, [2, 5, 11])
        assert race.permuted([2, 0, 1]).entries == (11, 2, 5)
        assert race.reversed().entries == (11, 5, 2)


def test_method_aliases():
    assert resolve_method("series") == "series"
    assert resolve_method("Same-Type") == "same_type"
    assert resolve_method("three-way") == "three_way"
    assert resolve_method("two-way") == "two_way"
    assert resolve_method("surrogate") == "surrogate_mc"
    with pytest.raises(DomainError):
        resolve_method("exact")


@pytest.mark.parametrize("method", ["series", "first_order"])
def test_orderings_sum_to_one(ctx_101, method):
    race = RaceTuple.of(101, [2, 5, 11])
    reports, total = all_orderings(ctx_101, race, method)
    assert len(reports) == 6
    assert total == pytest.approx(1.0, abs=1e-10)


def test_orderings_sum_to_one_for_four(ctx_101):
    race = RaceTuple.of(101, [2, 5, 11, 17])
    reports, total = all_orderings(ctx_101, race, "series", coeffs=coefficient_table(4))
    assert len(reports) == 24
    assert total == pytest.approx(1.0, abs=1e-8)


def test_series_terms_and_report(ctx_101, coeffs3):
    race = RaceTuple.of(101, [1, 24, 100])
    report = density_series(ctx_101, coeffs3, race)
    assert report.delta == pytest.approx(report.terms.total)
    assert report.terms.baseline == pytest.approx(1 / 6)
    assert report.deviation == pytest.approx(report.delta - 1 / 6)
    assert not report.degenerate
    payload = report.to_dict()
    assert payload["tuple"] == [1, 24, 100]
    assert payload["calibration"]["EXTREME_TAU"] == ctx_101.config.Calibration.EXTREME_TAU


def test_first_order_drops_quadratic_terms(ctx_101, coeffs3):
    race = RaceTuple.of(101, [1, 24, 100])
    full = density_series(ctx_101, coeffs3, race)
    first = density_first_order(ctx_101, coeffs3, race)
    assert first.terms.c2_term == 0.0
    assert first.terms.alpha_term == pytest.approx(full.terms.alpha_term)
    assert first.terms.beta_term == pytest.approx(full.terms.beta_term)
    assert first.delta == pytest.approx(full.delta - full.terms.c2_term)


def test_three_way_matches_first_order(ctx_101):
    race = RaceTuple.of(101, [2, 5, 11])
    three = density_three_way(ctx_101, race)
    first = evaluate(ctx_101, race, "first_order")
    assert three.delta == pytest.approx(first.delta, abs=1e-12)


def test_three_way_needs_three(ctx_101):
    with pytest.raises(DomainError):
        density_three_way(ctx_101, RaceTuple.of(101, [2, 5]))


def test_same_type_matches_series_for_squares(ctx_101, coeffs3):
    race = RaceTuple.of(101, [1, 24, 9])
    same = density_same_type(ctx_101, coeffs3, race)
    series = density_series(ctx_101, coeffs3, race)
    assert same.delta == pytest.approx(series.delta, abs=1e-10)
    assert same.terms.alpha_term == 0.0


def test_same_type_rejects_mixed_tuple(ctx_101, coeffs3):
    with pytest.raises(DomainError):
        density_same_type(ctx_101, coeffs3, RaceTuple.of(101, [1, 2, 4]))


def test_two_way_favours_non_squares_mod_four(ctx_4):
    report = density_two_way(ctx_4, 3, 1)
    assert 0.5 < report.delta < 1.0
    assert density_two_way(ctx_4, 1, 3).delta == pytest.approx(1.0 - report.delta)


def test_two_way_dispatch_needs_pairs(ctx_101):
    with pytest.raises(DomainError):
        evaluate(ctx_101, RaceTuple.of(101, [2, 5, 11]), "two_way")


def test_small_modulus_expansion_is_flagged_degenerate(ctx_4):
    report = evaluate(ctx_4, RaceTuple.of(4, [3, 1]), "series")
    assert report.degenerate
    assert report.notes


def test_context_modulus_must_match(ctx_101):
    with pytest.raises(DomainError):
        density_series(ctx_101, None, RaceTuple.of(103, [2, 5, 11]))


def test_surrogate_is_deterministic(ctx_101):
    race = RaceTuple.of(101, [2, 5, 11])
    first = surrogate_density_mc(ctx_101, race, samples=50_000, seed=7)
    second = surrogate_density_mc(ctx_101, race, samples=50_000, seed=7, workers=1)
    assert first.delta == second.delta
    assert first.seed == 7 and first.samples == 50_000
    assert abs(first.delta - 1 / 6) < 0.05


def test_surrogate_two_way_closed_form(ctx_4):
    report = surrogate_density_mc(ctx_4, RaceTuple.of(4, [3, 1]), samples=200_000, seed=1)
    assert report.closed_form is not None
    assert abs(report.delta - report.closed_form) <= 5 * report.std_error


def test_surrogate_agrees_with_series(ctx_101, coeffs3):
    race = RaceTuple.of(101, [1, 24, 100])
    series = density_series(ctx_101, coeffs3, race)
    mc = surrogate_density_mc(ctx_101, race, samples=400_000, seed=3)
    assert abs(mc.delta - series.delta) <= 5 * mc.std_error + series.error_budget


SURROGATE_BATTERY = [
    (101, [2, 5, 11]),
    (101, [1, 24, 100]),
    (101, [3, 7, 50]),
    (101, [1, 2, 4]),
    (101, [10, 20, 30]),
    (101, [6, 35, 77]),
    (101, [1, 24, 9]),
    (101, [2, 5, 11, 17]),
    (420, [1, 11, 13]),
    (420, [17, 19, 23]),
    (420, [1, 419, 209]),
    (420, [1, 121, 169]),
    (420, [43, 47, 53]),
    (420, [29, 31, 37, 41]),
    pytest.param(10007, [2, 5, 11], marks=pytest.mark.slow),
    pytest.param(10007, [1, 10006, 3], marks=pytest.mark.slow),
    pytest.param(10007, [1, 2, 5], marks=pytest.mark.slow),
    pytest.param(10007, [7, 13, 10000], marks=pytest.mark.slow),
    pytest.param(10007, [3, 9, 27, 81], marks=pytest.mark.slow),
    pytest.param(10007, [1, 24, 10006], marks=pytest.mark.slow),
]


@pytest.mark.parametrize("q,entries", SURROGATE_BATTERY)
def test_surrogate_battery_agrees_with_series(request, q, entries):
    ctx = request.getfixturevalue(f"ctx_{q}")
    race = RaceTuple.of(q, entries)
    series = evaluate(ctx, race, "series")
    mc = surrogate_density_mc(ctx, race, samples=10 ** 6, seed=q + len(entries))
    assert abs(mc.delta - series.delta) <= 3 * mc.std_error + series.error_budget


def test_marginalization(ctx_101):
    race = RaceTuple.of(101, [2, 5, 11, 17])
    check = marginalize_check(ctx_101, coefficient_table(4), race, [0, 2, 3])
    assert check.orderings == 4
    assert check.within


def test_marginalization_rejects_bad_indices(ctx_101):
    race = RaceTuple.of(101, [2, 5, 11, 17])
    with pytest.raises(DomainError):
        marginalize_check(ctx_101, None, race, [0, 0, 1])
    with pytest.raises(DomainError):
        marginalize_check(ctx_101, None, race, [0, 1, 4])


def test_deviation_is_small_against_baseline(ctx_101):
    for entries in ([2, 5, 11], [1, 24, 100], [3, 7, 50]):
        report = evaluate(ctx_101, RaceTuple.of(101, entries), "series")
        assert abs(report.deviation) < 1 / (math.sqrt(ctx_101.n_q))
