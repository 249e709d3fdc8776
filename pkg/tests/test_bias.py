"""
Unit tests for bias classification, witnesses, constructions and counterexamples
"""

import math

import pytest

from primerace.bias import (
    BIASED,
    EXTREME,
    SYMMETRIC,
    UNBIASED,
    bias_factor,
    bias_factor_counterexample,
    classify_bias,
    construct_biased_tuple,
    extreme_bias_witness,
    nonsquare_unit,
    ranking_consistent,
)
from primerace.config import Config
from primerace.densities import RaceTuple, density_series
from primerace.errors import ConstructionError, DomainError, PreconditionError
from primerace.spectral import SpectralContext


class TestWitness:
    """Extreme-bias witness search on signed values"""

    def test_prime_power_ratio_chain(self):
        witness = extreme_bias_witness([1, 2, 4])
        assert witness.kind == "prime-power-ratio"
        assert witness.indices == (0, 1, 2)
        assert witness.permutation == (1, 2, 3)
        assert witness.value == pytest.approx(math.log(2) / 2)

    def test_powers_of_three(self):
        assert extreme_bias_witness([1, 3, 9]) is not None

    def test_no_prime_power_ratios(self):
        assert extreme_bias_witness([1, 6, 10]) is None

    def test_opposite_pair_wins(self):
        witness = extreme_bias_witness([5, -5, 7])
        assert witness.kind == "opposite-pair"
        assert witness.indices == (0, 1)

    def test_opposite_signs_carry_no_weight(self):
        assert extreme_bias_witness([-2, 3, 5]) is None

    @pytest.mark.parametrize("values", [[1, 2], [0, 1, 2], [3, 3, 5]])
    def test_bad_input(self, values):
        with pytest.raises(DomainError):
            extreme_bias_witness(values)


@pytest.mark.parametrize("q,entries,expected", [
    (7, [1, 2, 4], SYMMETRIC),
    (4, [3, 1], BIASED),
    (7, [1, 4], UNBIASED),
    (101, [1, 100, 5], EXTREME),
    (101, [1, 2, 4], EXTREME),
    (101, [2, 5, 11], BIASED),
])
def test_classification(q, entries, expected):
    verdict = classify_bias(RaceTuple.of(q, entries))
    assert verdict.classification == expected
    assert verdict.threshold == pytest.approx(0.01 / math.log(q))
    assert verdict.reasons


def test_classification_reports_witness():
    verdict = classify_bias(RaceTuple.of(101, [1, 100, 5]))
    assert verdict.witness.kind == "opposite-pair"
    payload = verdict.to_dict()
    assert payload["witness"]["indices"] == [0, 1]
    assert payload["margin"] is None


def test_classification_margin_with_context(ctx_101):
    verdict = classify_bias(RaceTuple.of(101, [1, 24, 100]), ctx=ctx_101)
    assert verdict.margin is not None
    assert 0 < verdict.margin < 1 / 6


def test_extreme_verdict_records_margin_against_threshold(ctx_101):
    verdict = classify_bias(RaceTuple.of(101, [1, 100, 5]), ctx=ctx_101)
    assert verdict.classification == EXTREME
    expected = ">=" if verdict.margin >= verdict.threshold else "not confirmed"
    assert any(expected in reason for reason in verdict.reasons)


def test_raised_threshold_leaves_witness_unconfirmed(ctx_101):
    strict = Config.derive("StrictTau", calibration={"EXTREME_TAU": 100.0})
    verdict = classify_bias(RaceTuple.of(101, [1, 100, 5]), ctx=ctx_101, config=strict)
    assert verdict.classification == EXTREME
    assert verdict.threshold == pytest.approx(100.0 / math.log(101))
    assert verdict.margin < verdict.threshold
    assert "not confirmed" in verdict.reasons[-1]


def test_no_margin_reason_without_context():
    verdict = classify_bias(RaceTuple.of(101, [1, 100, 5]))
    assert not any("margin" in reason for reason in verdict.reasons)


def test_bias_factor(coeffs3):
    a1 = 1.0 / (4.0 * math.sqrt(math.pi))
    # C = (-1, 1, 1) mod 101
    assert bias_factor(coeffs3, RaceTuple.of(101, [2, 5, 1])) == pytest.approx(2 * a1)
    assert bias_factor(coeffs3, RaceTuple.of(101, [2, 5, 3])) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(DomainError):
        bias_factor(coeffs3, RaceTuple.of(101, [2, 5]))


def test_ranking_gap_is_too_small_at_101(ctx_101, coeffs3):
    check = ranking_consistent(ctx_101, coeffs3, RaceTuple.of(101, [2, 5, 1]), RaceTuple.of(101, [1, 5, 2]))
    assert check.factor_a > check.factor_b
    assert not check.applies
    assert check.consistent


class TestConstructions:
    """Explicit biased tuples"""

    def test_mixed_at_101(self):
        construction = construct_biased_tuple(101, 3)
        assert construction.race.entries == (1, 24, 100)
        assert construction.swapped.entries == (24, 1, 100)
        assert (construction.predicted_sign, construction.swapped_sign) == (1, -1)
        assert construction.adjustments == ()

    def test_squares_at_101(self):
        construction = construct_biased_tuple(101, 3, "squares")
        assert construction.race.entries == (1, 24, 9)
        assert construction.race.same_type
        assert any("-1 is a square" in note for note in construction.notes)

    def test_nonsquares_at_101(self):
        assert nonsquare_unit(101) == 2
        construction = construct_biased_tuple(101, 3, "nonsquares")
        assert construction.race.entries == (2, 48, 18)
        assert construction.race.c_values == (-1, -1, -1)

    def test_longer_tuple(self):
        construction = construct_biased_tuple(101, 5)
        assert construction.race.r == 5
        assert construction.race.entries[0] == 1
        assert construction.race.entries[-1] == 100
        assert construction.swapped.entries[3] == 1

    def test_predicted_signs_hold(self, ctx_101, coeffs3):
        construction = construct_biased_tuple(101, 3)
        assert density_series(ctx_101, coeffs3, construction.race).deviation > 0
        assert density_series(ctx_101, coeffs3, construction.swapped).deviation < 0

    @pytest.mark.parametrize("q", [
        101,
        1009,
        pytest.param(10007, marks=pytest.mark.slow),
    ])
    def test_deviation_scales_like_one_over_log_q(self, request, coeffs3, q):
        ctx = request.getfixturevalue("ctx_10007") if q == 10007 else SpectralContext.build(q)
        construction = construct_biased_tuple(q, 3, "mixed")
        deviation = density_series(ctx, coeffs3, construction.race).deviation
        scale = abs(coeffs3.beta[0, 2]) * math.log(2) / math.log(q)
        assert deviation > 0
        assert 0.1 * scale <= deviation <= 10 * scale
        assert density_series(ctx, coeffs3, construction.swapped).deviation < 0

    def test_to_dict(self):
        payload = construct_biased_tuple(101, 3).to_dict()
        assert payload["signed"] == [1, 24, -1]
        assert payload["variant"] == "mixed"

    def test_bad_requests(self):
        with pytest.raises(DomainError):
            construct_biased_tuple(101, 2)
        with pytest.raises(DomainError):
            construct_biased_tuple(101, 3, "cubes")

    def test_modulus_too_small(self):
        with pytest.raises(ConstructionError):
            construct_biased_tuple(7, 5)


class TestCounterexamples:
    """Tuples that refute a linear bias factor"""

    def test_last_position_at_101(self):
        example = bias_factor_counterexample(101, 3, (0, 0, 1))
        assert example.a.entries == (1, 48, 23)
        assert example.b.entries == (1, 48, 2)
        assert example.kappa_gap() == 2
        assert example.case == "last-position, positive"

    @pytest.mark.parametrize("kappa", [(0, 0, -1), (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)])
    def test_every_case_has_positive_gap(self, kappa):
        example = bias_factor_counterexample(101, 3, kappa)
        assert example.kappa_gap() > 0
        assert example.to_dict()["kappa_gap"] == example.kappa_gap()

    def test_first_position_moves_the_free_entry(self):
        example = bias_factor_counterexample(101, 3, (1, 0, 0))
        assert example.case.startswith("first-position")
        assert example.a.entries == (23, 48, 1)

    def test_bad_kappa(self):
        with pytest.raises(PreconditionError):
            bias_factor_counterexample(101, 3, (0, 0, 0))
        with pytest.raises(DomainError):
            bias_factor_counterexample(101, 3, (0, 1))

    @pytest.mark.slow
    @pytest.mark.parametrize("kappa", [(0, 0, 1), (0, 0, -1), (0, 1, 0)])
    def test_density_order_is_reversed_at_10007(self, ctx_10007, coeffs3, kappa):
        example = bias_factor_counterexample(10007, 3, kappa)
        assert example.kappa_gap() > 0
        assert density_series(ctx_10007, coeffs3, example.a).delta < density_series(ctx_10007, coeffs3, example.b).delta
