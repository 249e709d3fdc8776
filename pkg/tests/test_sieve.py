"""
Unit tests for the prime sieves and the prime-power weight table
"""

import math

import numpy as np
import pytest
from sympy import primefactors

from primerace.errors import ConfigurationError, DomainError
from primerace.sieve import prime_pi, prime_power_weights, segmented_sieve, simple_sieve, truncation_limit


def test_simple_sieve_small_values():
    assert simple_sieve(1).size == 0
    assert list(simple_sieve(2)) == [2]
    assert list(simple_sieve(30)) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


@pytest.mark.parametrize("x,expected", [(2, 1), (3, 2), (10, 4), (100, 25), (1000, 168), (10 ** 6, 78498)])
def test_prime_pi(x, expected):
    assert prime_pi(x, segment_size=2 ** 16) == expected


def test_segmented_matches_simple_sieve():
    x = 10 ** 5 + 3
    streamed = np.concatenate([seg.primes for seg in segmented_sieve(x, segment_size=2 ** 16, workers=3)])
    assert np.array_equal(streamed, simple_sieve(x))


def test_segments_are_ordered_and_tagged():
    segments = list(segmented_sieve(300000, segment_size=2 ** 16, q=7, workers=2))
    highs = [seg.high for seg in segments]
    assert highs == sorted(highs)
    for seg in segments:
        assert np.array_equal(seg.residues, seg.primes % 7)
        assert ((seg.primes >= seg.low) & (seg.primes <= seg.high)).all()


def test_segmented_sieve_with_start():
    primes = np.concatenate([seg.primes for seg in segmented_sieve(200, segment_size=2 ** 16, start=100)])
    assert list(primes) == [p for p in simple_sieve(200) if p >= 100]


def test_sieve_limits():
    with pytest.raises(ConfigurationError):
        list(segmented_sieve(10 ** 11))
    with pytest.raises(ConfigurationError):
        list(segmented_sieve(1000, segment_size=100))


def test_truncation_limit():
    assert truncation_limit(1000) == int(2 * 1000 * math.log(1000))
    assert truncation_limit(1000, factor=1.0) == int(1000 * math.log(1000))


def test_prime_power_weights():
    n, p, w = prime_power_weights(50.0, 100)
    expected = [k for k in range(2, 101) if len(primefactors(k)) == 1]
    assert list(n) == expected
    assert list(n[:8]) == [2, 3, 4, 5, 7, 8, 9, 11]
    assert list(p[:8]) == [2, 3, 2, 5, 7, 2, 3, 11]
    assert w[2] == pytest.approx(math.log(2) / 4 * math.exp(-4 / 50))


def test_prime_power_weights_rejects_bad_smoothing():
    with pytest.raises(DomainError):
        prime_power_weights(-1.0, 100)
