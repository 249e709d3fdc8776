"""
PRIMERACE Dirichlet Characters

The character group mod q built on the CRT decomposition of the unit
group, conductors and primitive induction, the log-conductor sum, and the
smoothed logarithmic derivative L'/L(1, chi*) for every character at once.

Characters are indexed by exponent vectors m (one entry per cyclic factor)
raveled in C order. chi_m(g_1^e_1 ... g_k^e_k) = exp(2 pi i sum m_j e_j / n_j),
held as an integer phase mod the group exponent L until evaluation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
from sympy import divisors, factorint, primitive_root
from sympy.ntheory.modular import crt

from primerace.arith import check_modulus, phi, require_unit, von_mangoldt
from primerace.cache import CachedSums, SmoothedSumCache
from primerace.config import Config
from primerace.decorators import memoize_once
from primerace.errors import DomainError, PreconditionError
from primerace.sieve import prime_power_weights, truncation_limit

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CyclicFactor:
    """One cyclic factor of (Z/qZ)^*: a generator lifted to a unit mod q."""

    order: int
    generator: int
    prime: int
    power: int  # p^k, the modulus of the CRT component
    kind: str  # "odd", "minus_one" or "five"


def _lift(residue: int, modulus: int, q: int) -> int:
    """Unit mod q that is `residue` mod `modulus` and 1 mod q/modulus."""
    rest = q // modulus
    if rest == 1:
        return residue % q
    value, _ = crt([modulus, rest], [residue % modulus, 1])
    return int(value)


def _cyclic_factors(q: int) -> Tuple[CyclicFactor, ...]:
    factors = []
    for p, k in sorted(factorint(q).items()):
        pk = p ** k
        if p == 2:
            if k >= 2:
                factors.append(CyclicFactor(2, _lift(-1, pk, q), 2, pk, "minus_one"))
            if k >= 3:
                factors.append(CyclicFactor(2 ** (k - 2), _lift(5, pk, q), 2, pk, "five"))
        else:
            g = int(primitive_root(pk))
            factors.append(CyclicFactor(pk // p * (p - 1), _lift(g, pk, q), p, pk, "odd"))
    return tuple(factors)


class CharacterGroup:
    """
    All Dirichlet characters mod q.

    ``units[i]`` is the unit with exponent vector unravel(i, orders), so the
    unit order and the character index order share one layout; that is
    what lets the bulk sums run through an n-dimensional FFT.
    """

    def __init__(self, q: int):
        self.q = q
        self.factors = _cyclic_factors(q)
        self.orders = tuple(f.order for f in self.factors) or (1,)
        self.phi = phi(q) if q > 1 else 1
        self.exponent = math.lcm(*self.orders)
        self._steps = np.array([self.exponent // n for n in self.orders], dtype=np.int64)

        units = np.ones(1, dtype=np.int64)
        for f in self.factors:
            powers = np.ones(f.order, dtype=np.int64)
            for e in range(1, f.order):
                powers[e] = powers[e - 1] * f.generator % q
            units = (units[:, None] * powers[None, :] % q).ravel()
        self.units = units % max(q, 1)
        if len(self.units) != self.phi:
            raise DomainError(f"Unit enumeration for q={q} produced {len(self.units)} elements, expected {self.phi}")

        self.index_of = np.full(max(q, 1), -1, dtype=np.int64)
        self.index_of[self.units] = np.arange(self.phi)

        # exponent matrix: row j holds m_j for every character index
        self._exponents = np.indices(self.orders).reshape(len(self.orders), -1).astype(np.int64)
        self._conductors: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.phi

    def __repr__(self) -> str:
        return f"CharacterGroup(q={self.q}, orders={self.orders})"

    # ---------------------------------------------------------------- lookup
    def dlog(self, a: int) -> np.ndarray:
        """Exponent vector of the unit a with respect to the generators."""
        index = self.index_of[int(a) % self.q] if self.q > 1 else 0
        if index < 0:
            raise DomainError(f"{a} is not a unit mod {self.q}")
        return np.array(np.unravel_index(index, self.orders), dtype=np.int64)

    def character(self, index: int) -> "Character":
        if not 0 <= index < self.phi:
            raise DomainError(f"Character index {index} out of range for q={self.q}")
        exps = tuple(int(m) for m in np.unravel_index(index, self.orders))
        return Character(group=self, index=int(index), exponents=exps)

    def from_exponents(self, exponents) -> "Character":
        exps = tuple(int(m) % n for m, n in zip(exponents, self.orders))
        return self.character(int(np.ravel_multi_index(exps, self.orders)))

    def principal(self) -> "Character":
        return self.character(0)

    def __iter__(self):
        for index in range(self.phi):
            yield self.character(index)

    # ---------------------------------------------------------------- values
    def phases_at(self, a: int) -> np.ndarray:
        """Integer phases (mod exponent) of chi(a) for every character index."""
        e = self.dlog(a)
        return (self._exponents * (e * self._steps)[:, None]).sum(axis=0) % self.exponent

    def values_at(self, a: int) -> np.ndarray:
        """chi(a) for every character (complex, unit modulus)."""
        return np.exp(2j * np.pi * self.phases_at(a) / self.exponent)

    def parities(self) -> np.ndarray:
        """chi(-1) in {+1, -1} for every character."""
        if self.q <= 2:
            return np.ones(self.phi, dtype=np.int64)
        phases = self.phases_at(self.q - 1)
        return np.where(phases == 0, 1, -1)

    # ------------------------------------------------------------ conductors
    def conductors(self) -> np.ndarray:
        """Conductor of every character, as the product of component conductors."""
        if self._conductors is not None:
            return self._conductors
        cond = np.ones(self.phi, dtype=np.int64)
        minus = None
        five = None
        two_power = 1
        for j, f in enumerate(self.factors):
            m = self._exponents[j]
            if f.kind == "odd":
                k = int(round(math.log(f.power, f.prime)))
                v = _valuation(m, f.prime, k)
                local = np.where(m == 0, 1, f.prime ** np.maximum(1, k - v))
                cond *= local
            elif f.kind == "minus_one":
                minus = m
                two_power = f.power
            else:
                five = m
        if minus is not None:
            k = int(round(math.log2(two_power)))
            if five is None:
                local = np.where(minus != 0, 4, 1)
            else:
                v = _valuation(five, 2, k - 2)
                local = np.where(five != 0, 2 ** (k - v), np.where(minus != 0, 4, 1))
            cond *= local
        self._conductors = cond
        return cond

    def log_conductors(self) -> np.ndarray:
        return np.log(self.conductors().astype(np.float64))


def _valuation(m: np.ndarray, p: int, cap: int) -> np.ndarray:
    """p-adic valuation of each entry, capped at ``cap`` (zeros map to cap)."""
    v = np.zeros_like(m)
    work = m.copy()
    for _ in range(cap):
        divisible = (work % p == 0) & (v < cap)
        if not divisible.any():
            break
        v[divisible] += 1
        work[divisible] //= p
    return np.minimum(v, cap)


@memoize_once(max_entries=32)
def _group(q: int) -> CharacterGroup:
    return CharacterGroup(q)


def character_group(q: int) -> CharacterGroup:
    """The group of Dirichlet characters mod q (q >= 3)."""
    return _group(check_modulus(q))


@dataclass(frozen=True)
class Character:
    """A Dirichlet character given by its exponent vector in a CharacterGroup."""

    group: CharacterGroup = field(repr=False, compare=False)
    index: int
    exponents: Tuple[int, ...]

    @property
    def q(self) -> int:
        return self.group.q

    @property
    def is_principal(self) -> bool:
        return self.index == 0

    def phase(self, n: int) -> Optional[int]:
        """k with chi(n) = exp(2 pi i k / L), or None when gcd(n, q) > 1."""
        if math.gcd(int(n), self.q) != 1:
            return None
        e = self.group.dlog(n)
        steps = self.group._steps
        return int(sum(int(m) * int(x) * int(s) for m, x, s in zip(self.exponents, e, steps)) % self.group.exponent)

    def __call__(self, n: int) -> complex:
        k = self.phase(n)
        if k is None:
            return 0j
        return complex(np.exp(2j * np.pi * k / self.group.exponent))

    def conjugate(self) -> "Character":
        return self.group.from_exponents([-m for m in self.exponents])

    @property
    def parity(self) -> int:
        return 1 if self.phase(self.q - 1) == 0 else -1

    @property
    def conductor(self) -> int:
        return int(self.group.conductors()[self.index])

    def induce_primitive(self) -> "Character":
        """The primitive character mod the conductor that induces this one."""
        d = self.conductor
        target = _group(d)
        if d == 1:
            return target.principal()
        exponents = []
        for f, n in zip(target.factors, target.orders):
            u = int(f.generator)
            while math.gcd(u, self.q) != 1:
                u += d
            k = self.phase(u)
            exponents.append((k * n) // self.group.exponent)
        return target.from_exponents(exponents)


def conductor_by_scan(chi: Character) -> int:
    """Conductor by testing divisors d of q for triviality on units = 1 mod d."""
    q = chi.q
    units = chi.group.units
    for d in divisors(q):
        candidates = units[units % d == 1]
        if all(chi.phase(int(u)) == 0 for u in candidates):
            return int(d)
    return q


# =============================================================================
# Log-conductor sum
# =============================================================================


@dataclass(frozen=True)
class LogConductorSum:
    direct: float
    closed_form: float
    imag_residual: float

    @property
    def agree(self) -> bool:
        scale = max(1.0, abs(self.closed_form))
        return abs(self.direct - self.closed_form) <= 1e-9 * scale


def log_conductor_sum(q: int, a: int) -> LogConductorSum:
    """
    sum over chi mod q of chi(a) log(q*_chi), directly and in closed form.

    Closed form: phi(q)(log q - sum_{p | q} log(p)/(p-1)) when a = 1 mod q,
    otherwise -phi(q) Lambda(q/(q, a-1)) / phi(q/(q, a-1)).
    """
    group = character_group(q)
    a = require_unit(a, group.q)
    total = np.sum(group.values_at(a) * group.log_conductors())
    if a % group.q == 1:
        closed = group.phi * (math.log(q) - sum(math.log(p) / (p - 1) for p in factorint(q)))
    else:
        m = q // math.gcd(q, a - 1)
        closed = -group.phi * von_mangoldt(m) / phi(m) if m > 1 else 0.0
    return LogConductorSum(direct=float(total.real), closed_form=float(closed), imag_residual=float(abs(total.imag)))


# =============================================================================
# Smoothed L'/L sums
# =============================================================================


def default_smoothing(q: int, config=Config) -> int:
    """y = min(max(q^2, SMOOTHING_Y_MIN), SMOOTHING_Y_CAP), never below q."""
    y = min(max(q * q, config.SMOOTHING_Y_MIN), config.SMOOTHING_Y_CAP)
    return int(max(y, q))


def tail_bound(q: int, y: float, config=Config) -> float:
    """Smoothing error budget c*log(q)/sqrt(y) plus the 1/q^2 truncation term."""
    return config.Calibration.SMOOTHING_TAIL_C * math.log(q) / math.sqrt(y) + 1.0 / (q * q)


@dataclass(frozen=True)
class SmoothedLogDeriv:
    """Smoothed approximation of L'/L(1, chi*) with its error budget."""

    chi: Character
    y: float
    value: complex
    tail_bound: float


def _class_weights(q: int, n: np.ndarray, p: np.ndarray, w: np.ndarray) -> np.ndarray:
    """T[c] = sum of weights over prime powers n = c mod q with gcd(n, q) = 1."""
    coprime = ~np.isin(p, np.array(list(factorint(q)), dtype=np.int64))
    return np.bincount(n[coprime] % q, weights=w[coprime], minlength=q)


def _bulk_sums(q: int, y: int, limit: int) -> CachedSums:
    """sum_n chi*(n) Lambda(n)/n e^{-n/y} over n <= limit, for every chi mod q."""
    group = character_group(q)
    n, p, w = prime_power_weights(float(y), limit)
    classes = _class_weights(q, n, p, w)
    tensor = classes[group.units].reshape(group.orders)
    sums = (np.fft.ifftn(tensor) * group.phi).ravel().astype(np.complex128)
    principal = float(classes.sum())

    # chi*(p^e) for p | q and p not dividing the conductor of chi
    conductors = group.conductors()
    for prime, nu in factorint(q).items():
        rest = q // prime ** nu
        u = _crt_pair(prime, rest, prime ** nu) if rest > 1 else 1
        z = group.values_at(u)
        active = conductors % prime != 0
        correction = np.zeros(group.phi, dtype=np.complex128)
        zp = np.ones(group.phi, dtype=np.complex128)
        pe = 1
        while pe * prime <= limit:
            pe *= prime
            zp = zp * z
            correction += zp * (math.log(prime) / pe * math.exp(-pe / y))
        sums[active] += correction[active]

    return CachedSums(q=q, y=int(y), limit=limit, values=sums, principal=principal)


def _crt_pair(prime: int, rest: int, prime_power: int) -> int:
    """Unit that is prime mod rest and 1 mod prime_power."""
    value, _ = crt([rest, prime_power], [prime % rest, 1])
    return int(value)


@memoize_once(max_entries=64)
def _smoothed_sums_cached(q: int, y: int, limit: int, use_disk: bool, cache_dir: Optional[str]) -> CachedSums:
    store = SmoothedSumCache(cache_dir) if use_disk else None
    if store is not None:
        hit = store.load(q, y, limit)
        if hit is not None and len(hit.values) == phi(q):
            return hit
    sums = _bulk_sums(q, y, limit)
    if store is not None:
        try:
            store.store(sums)
        except OSError as e:
            logger.warning(f"Could not write character-sum cache: {e}")
    return sums


def smoothed_character_sums(q: int, y: Optional[int] = None, config=Config) -> CachedSums:
    """
    Smoothed sums S_chi = sum chi*(n) Lambda(n)/n e^{-n/y} for every chi mod q.

    L'/L(1, chi*) is approximated by -S_chi; ``principal`` holds the sum over
    n coprime to q before the chi*(p^e), p | q corrections.
    """
    q = check_modulus(q)
    y = int(y if y is not None else default_smoothing(q, config))
    if y < q:
        raise PreconditionError(
            f"Smoothing parameter y={y} is below q={q}",
            suggestion="The smoothed sums are only controlled for y >= q",
        )
    limit = truncation_limit(y, config=config)
    cache_dir = str(config.cache_path()) if config.CACHE_ENABLED else None
    sums = _smoothed_sums_cached(q, y, limit, bool(config.CACHE_ENABLED), cache_dir)
    return replace(sums, budgets=np.full(len(sums.values), tail_bound(q, y, config=config)))


def log_deriv_L_at_1(chi: Character, y: Optional[int] = None, config=Config) -> SmoothedLogDeriv:
    """-sum chi*(n) Lambda(n) n^{-1} e^{-n/y}, truncated at n <= 2 y log y."""
    if chi.is_principal:
        raise DomainError(
            "L'/L(1, chi) is not defined for the principal character",
            suggestion="Use principal_smoothed_sum(q, y) instead",
        )
    sums = smoothed_character_sums(chi.q, y, config=config)
    return SmoothedLogDeriv(
        chi=chi,
        y=sums.y,
        value=complex(-sums.values[chi.index]),
        tail_bound=float(sums.budgets[chi.index]),
    )


def principal_smoothed_sum(q: int, y: int, config=Config) -> float:
    """sum over n coprime to q of Lambda(n) n^{-1} e^{-n/y}."""
    q = check_modulus(q)
    if y < q:
        raise PreconditionError(f"principal_smoothed_sum needs y >= q (got y={y}, q={q})")
    return smoothed_character_sums(q, y, config=config).principal


def direct_smoothed_sum(chi: Character, y: float, limit: Optional[int] = None) -> complex:
    """
    Slow oracle: sum chi*(n) Lambda(n)/n e^{-n/y} term by term through the
    primitive character, with no FFT and no p | q corrections.
    """
    limit = int(limit if limit is not None else truncation_limit(y))
    star = chi.induce_primitive()
    d = star.q
    n, _, w = prime_power_weights(float(y), limit)
    if d == 1:
        return complex(w.sum())
    idx = star.group.index_of[n % d]
    keep = idx >= 0
    exps = np.array(np.unravel_index(idx[keep], star.group.orders), dtype=np.int64)
    m = np.array(star.exponents, dtype=np.int64)[:, None] * star.group._steps[:, None]
    phases = (exps * m).sum(axis=0) % star.group.exponent
    return complex(np.sum(w[keep] * np.exp(2j * np.pi * phases / star.group.exponent)))


__all__ = [
    "CyclicFactor",
    "CharacterGroup",
    "Character",
    "LogConductorSum",
    "SmoothedLogDeriv",
    "character_group",
    "conductor_by_scan",
    "log_conductor_sum",
    "default_smoothing",
    "tail_bound",
    "smoothed_character_sums",
    "log_deriv_L_at_1",
    "principal_smoothed_sum",
    "direct_smoothed_sum",
]
