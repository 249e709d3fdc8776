"""
Unit tests for modular and prime arithmetic
"""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from primerace.arith import (
    Residue,
    aux_primes,
    chebyshev_c,
    check_modulus,
    count_sqrt,
    cube_root_condition,
    is_square_mod,
    lambda0,
    least_nonresidue,
    phi,
    prime_power_base,
    require_unit,
    signed_rep,
    units,
    von_mangoldt,
)
from primerace.errors import DomainError


def test_check_modulus_rejects_small_and_non_integers():
    for bad in (0, 1, 2, -5):
        with pytest.raises(DomainError):
            check_modulus(bad)
    with pytest.raises(DomainError):
        check_modulus(3.5)
    assert check_modulus(3) == 3


def test_require_unit():
    assert require_unit(13, 12) == 1
    with pytest.raises(DomainError):
        require_unit(4, 12)


@given(st.integers(min_value=3, max_value=10**6), st.integers(min_value=-10**9, max_value=10**9))
def test_signed_rep_is_balanced_representative(q, a):
    s = signed_rep(a, q)
    assert (s - a) % q == 0
    assert abs(s) <= q / 2
    assert s != -q / 2


def test_units_and_phi():
    assert list(units(12)) == [1, 5, 7, 11]
    assert phi(12) == 4
    assert phi(101) == 100
    assert len(units(2310)) == phi(2310) == 480


def test_residue_arithmetic():
    a = Residue.of(-1, 7)
    assert a.value == 6
    assert a.signed_rep == -1
    assert a.is_unit
    assert not Residue.of(4, 12).is_unit
    assert (a * a).value == 1
    assert a.inverse().value == 6
    with pytest.raises(DomainError):
        Residue.of(3, 12).inverse()


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=3, max_value=3000), st.integers(min_value=1, max_value=10**6))
def test_square_root_count_methods_agree(q, a):
    if math.gcd(a, q) != 1:
        return
    assert count_sqrt(a, q, method="enumerate") == count_sqrt(a, q, method="formula")


def test_chebyshev_c_small_moduli():
    assert chebyshev_c(1, 4) == 1
    assert chebyshev_c(3, 4) == -1
    assert chebyshev_c(1, 8) == 3
    assert [chebyshev_c(a, 7) for a in (1, 2, 4)] == [1, 1, 1]
    assert [chebyshev_c(a, 7) for a in (3, 5, 6)] == [-1, -1, -1]
    # 1 has 2^(omega(q)) square roots for odd q
    assert chebyshev_c(1, 105) == 7


def test_is_square_mod():
    assert is_square_mod(4, 101)
    assert not is_square_mod(2, 101)  # 101 = 5 mod 8
    assert is_square_mod(100, 101)  # 101 = 1 mod 4


def test_unknown_sqrt_method():
    with pytest.raises(DomainError):
        count_sqrt(1, 7, method="guess")


def test_prime_power_base():
    assert prime_power_base(8) == 2
    assert prime_power_base(81) == 3
    assert prime_power_base(97) == 97
    assert prime_power_base(12) is None
    assert prime_power_base(1) is None


def test_von_mangoldt_and_lambda0():
    assert von_mangoldt(9) == pytest.approx(math.log(3))
    assert von_mangoldt(10) == 0.0
    assert lambda0(4) == pytest.approx(math.log(2) / 4)
    assert lambda0(Fraction(5, 3)) == 0.0
    assert lambda0(Fraction(10, 5)) == pytest.approx(math.log(2) / 2)
    with pytest.raises(DomainError):
        lambda0(0)
    with pytest.raises(DomainError):
        von_mangoldt(0)


def test_least_nonresidue():
    assert least_nonresidue(7) == 3
    assert least_nonresidue(101) == 2
    assert least_nonresidue(10007) == 5
    with pytest.raises(DomainError):
        least_nonresidue(15)


def test_aux_primes():
    aux = aux_primes(101)
    assert (aux.p0, aux.p1, aux.p2) == (2, 3, 5)
    aux = aux_primes(10007)
    assert (aux.p0, aux.p1, aux.p2) == (5, 2, 3)
    aux = aux_primes(12)
    assert aux.p0 == 2  # least non-residue of 3
    assert (aux.p1, aux.p2) == (5, 7)


def test_cube_root_condition():
    assert cube_root_condition(1, 2, 4, 7)
    assert cube_root_condition(1, 4, 2, 7)
    assert not cube_root_condition(1, 2, 3, 7)
    assert not cube_root_condition(1, 3, 9, 101)
    with pytest.raises(DomainError):
        cube_root_condition(1, 1, 2, 7)
