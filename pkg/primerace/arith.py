"""
PRIMERACE Arithmetic

Elementary modular and prime arithmetic shared by every other module:
residues, square roots mod q, the weight C_q(a), von Mangoldt functions,
auxiliary prime selection and the cube-root symmetry test.
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np
from sympy import factorint, isprime, legendre_symbol, nextprime, totient

from primerace.config import Config
from primerace.decorators import memoize_once
from primerace.errors import DomainError

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction]


# =============================================================================
# Residues
# =============================================================================


def check_modulus(q: int) -> int:
    """Return q as int, rejecting moduli below 3."""
    if isinstance(q, bool) or int(q) != q:
        raise DomainError(f"Modulus must be an integer, got {q!r}")
    q = int(q)
    if q < 3:
        raise DomainError(
            f"Modulus q={q} is too small",
            suggestion="Races need at least two reduced residues: use q >= 3",
        )
    return q


def require_unit(a: int, q: int) -> int:
    """Return a mod q, raising DomainError unless gcd(a, q) = 1."""
    if math.gcd(int(a), q) != 1:
        raise DomainError(f"{a} is not a unit mod {q} (gcd = {math.gcd(int(a), q)})")
    return int(a) % q


def signed_rep(a: int, q: int) -> int:
    """Representative of a mod q in (-q/2, q/2]."""
    r = int(a) % q
    return r - q if 2 * r > q else r


def phi(q: int) -> int:
    return int(totient(q))


def units(q: int) -> np.ndarray:
    """Reduced residues mod q in increasing order."""
    values = np.arange(q, dtype=np.int64)
    return values[np.gcd(values, q) == 1]


@dataclass(frozen=True)
class Residue:
    """A residue class mod q; ``value`` is the least non-negative representative."""

    q: int
    value: int

    @classmethod
    def of(cls, value: int, q: int) -> "Residue":
        q = check_modulus(q)
        return cls(q=q, value=int(value) % q)

    @property
    def signed_rep(self) -> int:
        return signed_rep(self.value, self.q)

    @property
    def is_unit(self) -> bool:
        return math.gcd(self.value, self.q) == 1

    def inverse(self) -> "Residue":
        require_unit(self.value, self.q)
        return Residue(self.q, pow(self.value, -1, self.q))

    def __mul__(self, other: "Residue") -> "Residue":
        if not isinstance(other, Residue) or other.q != self.q:
            return NotImplemented
        return Residue(self.q, (self.value * other.value) % self.q)

    def __int__(self) -> int:
        return self.value


# =============================================================================
# Squares mod q and C_q(a)
# =============================================================================


@memoize_once(max_entries=16)
def _square_root_counts(q: int) -> np.ndarray:
    """counts[a] = #{b mod q : b^2 = a} for every a, by direct enumeration."""
    b = np.arange(q, dtype=np.int64)
    return np.bincount((b * b) % q, minlength=q)


def _count_sqrt_formula(a: int, q: int) -> int:
    count = 1
    for p, k in factorint(q).items():
        if p == 2:
            if k == 1:
                local = 1
            elif k == 2:
                local = 2 if a % 4 == 1 else 0
            else:
                local = 4 if a % 8 == 1 else 0
        else:
            local = 2 if legendre_symbol(a % p, p) == 1 else 0
        if local == 0:
            return 0
        count *= local
    return count


def count_sqrt(a: int, q: int, method: str = "auto", config=Config) -> int:
    """
    Number of b mod q with b^2 = a (mod q), for a unit a.

    ``method`` is "enumerate", "formula" or "auto" (enumeration up to
    ``SQRT_ENUMERATION_LIMIT``, CRT/Hensel counting above).
    """
    q = check_modulus(q)
    a = require_unit(a, q)
    if method == "auto":
        method = "enumerate" if q <= config.SQRT_ENUMERATION_LIMIT else "formula"
    if method == "enumerate":
        return int(_square_root_counts(q)[a])
    if method == "formula":
        return _count_sqrt_formula(a, q)
    raise DomainError(f"Unknown square-root counting method: {method}")


def chebyshev_c(a: int, q: int) -> int:
    """C_q(a): the number of square roots of a mod q, minus one."""
    return count_sqrt(a, q) - 1


def is_square_mod(a: int, q: int) -> bool:
    return count_sqrt(a, q) > 0


@dataclass(frozen=True)
class ChebyshevWeight:
    a: Residue
    c: int


def chebyshev_weight(a: int, q: int) -> ChebyshevWeight:
    return ChebyshevWeight(a=Residue.of(a, q), c=chebyshev_c(a, q))


# =============================================================================
# von Mangoldt
# =============================================================================


class _SmallestPrimeFactorTable:
    """Lazily grown smallest-prime-factor table, capped at SPF_TABLE_LIMIT."""

    def __init__(self):
        self._spf = np.zeros(0, dtype=np.int32)
        self._lock = threading.Lock()

    def covers(self, n: int) -> bool:
        return n < len(self._spf)

    def ensure(self, n: int, limit: int) -> bool:
        """Grow the table to include n; False when n exceeds the limit."""
        if n >= limit:
            return False
        if self.covers(n):
            return True
        with self._lock:
            if self.covers(n):
                return True
            size = min(limit, max(2 * (n + 1), 2 ** 16))
            logger.debug(f"Building smallest-prime-factor table up to {size}")
            spf = np.zeros(size, dtype=np.int32)
            for p in range(2, math.isqrt(size - 1) + 1):
                if spf[p] == 0:
                    block = spf[p * p::p]
                    block[block == 0] = p
            free = np.flatnonzero(spf == 0)
            spf[free] = free
            self._spf = spf
        return True

    def __getitem__(self, n: int) -> int:
        return int(self._spf[n])


_SPF = _SmallestPrimeFactorTable()


def prime_power_base(n: int, config=Config) -> Optional[int]:
    """Return p when n = p^k (k >= 1), else None."""
    if n < 2:
        return None
    if _SPF.ensure(n, config.SPF_TABLE_LIMIT):
        p = _SPF[n]
        m = n
        while m % p == 0:
            m //= p
        return p if m == 1 else None
    factors = factorint(n)
    if len(factors) == 1:
        return int(next(iter(factors)))
    return None


def von_mangoldt(n: int) -> float:
    """Lambda(n) = log p for n = p^k, 0 otherwise."""
    n = int(n)
    if n < 1:
        raise DomainError(f"von Mangoldt function undefined at n={n}")
    p = prime_power_base(n)
    return math.log(p) if p is not None else 0.0


def lambda0(x: Rational) -> float:
    """Lambda_0(x) = Lambda(x)/x when x is a positive integer, 0 for other positive rationals."""
    x = Fraction(x)
    if x <= 0:
        raise DomainError(f"Lambda_0 is defined on positive rationals, got {x}")
    if x.denominator != 1:
        return 0.0
    n = x.numerator
    return von_mangoldt(n) / n


# =============================================================================
# Auxiliary primes
# =============================================================================


def least_nonresidue(p: int) -> int:
    """Smallest prime that is a quadratic non-residue mod p (3 when p = 2)."""
    if not isprime(int(p)):
        raise DomainError(f"{p} is not prime")
    p = int(p)
    if p == 2:
        return 3
    ell = 2
    while legendre_symbol(ell % p, p) != -1:
        ell = int(nextprime(ell))
    return ell


@dataclass(frozen=True)
class AuxPrimes:
    """p0: least non-residue of the largest prime factor; p1 < p2: smallest other primes coprime to q."""

    p0: int
    p1: int
    p2: int


def aux_primes(q: int) -> AuxPrimes:
    q = check_modulus(q)
    largest = max(factorint(q))
    p0 = least_nonresidue(largest)
    chosen = []
    ell = 2
    while len(chosen) < 2:
        if ell != p0 and q % ell != 0:
            chosen.append(ell)
        ell = int(nextprime(ell))
    return AuxPrimes(p0=p0, p1=chosen[0], p2=chosen[1])


# =============================================================================
# Cube-root symmetry
# =============================================================================


def cube_root_condition(a1: int, a2: int, a3: int, q: int) -> bool:
    """True iff a2 = a1*rho and a3 = a1*rho^2 for some rho != 1 with rho^3 = 1 (mod q)."""
    q = check_modulus(q)
    r1, r2, r3 = (require_unit(a, q) for a in (a1, a2, a3))
    if len({r1, r2, r3}) != 3:
        raise DomainError(f"Residues {a1}, {a2}, {a3} are not distinct mod {q}")
    rho = (r2 * pow(r1, -1, q)) % q
    return rho != 1 and pow(rho, 3, q) == 1 and (r1 * rho * rho) % q == r3


__all__ = [
    "Residue",
    "ChebyshevWeight",
    "AuxPrimes",
    "check_modulus",
    "require_unit",
    "signed_rep",
    "phi",
    "units",
    "count_sqrt",
    "chebyshev_c",
    "chebyshev_weight",
    "is_square_mod",
    "prime_power_base",
    "von_mangoldt",
    "lambda0",
    "least_nonresidue",
    "aux_primes",
    "cube_root_condition",
]
