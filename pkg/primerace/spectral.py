"""
PRIMERACE Spectral Quantities

N_q, B_q(a, b) and V_q(a1, a2): the variance-scale sums over the zeros of
all non-principal L-functions mod q that parametrize every density formula.

The zero sums are never formed from zeros. For each character,

    sum_gamma 1/(1/4 + gamma^2) = log q*_chi + 2 Re L'/L(1, chi*)
                                  - chi(-1) log 2 + gamma0

with gamma0 = Gamma'(1)/Gamma(1) - log 2, and L'/L is taken from the
smoothed sums of ``primerace.characters``. The classical explicit formula
has an extra -log(pi) per character; ZERO_SUM_LOG_PI switches it on.

B_q has two independent routes:
    char     twist the per-character zero sums by chi(a/b), all pairs at
             once through one FFT over the unit group
    residue  the closed expression in residues of a, b mod q, evaluated in
             polylog time per pair
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Tuple

import numpy as np
from sympy import factorint

from primerace.arith import (
    chebyshev_c,
    check_modulus,
    lambda0,
    phi,
    require_unit,
    signed_rep,
    units,
    von_mangoldt,
)
from primerace.characters import (
    character_group,
    default_smoothing,
    smoothed_character_sums,
    tail_bound,
)
from primerace.config import Config
from primerace.decorators import OnceCache, memoize_once
from primerace.errors import DegenerateContextError, DomainError, NumericalError
from primerace.logging import run_logger
from primerace.sieve import prime_power_weights, truncation_limit

logger = logging.getLogger(__name__)

GAMMA0 = -float(np.euler_gamma) - math.log(2.0)

ROUTES = ("residue", "char")


@dataclass(frozen=True)
class BValue:
    """One evaluation of B_q(a, b)."""

    q: int
    a: int
    b: int
    value: float
    route: str
    error_budget: float

    def __float__(self) -> float:
        return self.value

    def as_row(self) -> Tuple[int, int, float, str, float]:
        return (self.a, self.b, self.value, self.route, self.error_budget)


@dataclass(frozen=True)
class NqEstimate:
    q: int
    y: int
    value: float
    error_budget: float

    def __float__(self) -> float:
        return self.value


def _pair(q: int, a: int, b: int) -> Tuple[int, int]:
    a = require_unit(a, q)
    b = require_unit(b, q)
    if a == b:
        raise DomainError(
            f"B_q(a, b) needs distinct residues, got a = b = {a} mod {q}",
            suggestion="Pick two different reduced residues",
        )
    return a, b


# =============================================================================
# Character route
# =============================================================================


def zero_sums(q: int, y: Optional[int] = None, config=Config) -> Tuple[np.ndarray, float]:
    """
    Per-character zero sums indexed like the character group (entry 0,
    the principal character, is set to 0), and the per-character budget.
    """
    group = character_group(q)
    sums = smoothed_character_sums(q, y, config=config)
    log_deriv_real = -sums.values.real
    z = group.log_conductors() + 2.0 * log_deriv_real - group.parities() * math.log(2.0) + GAMMA0
    if config.ZERO_SUM_LOG_PI:
        z -= math.log(math.pi)
    z[0] = 0.0
    per_char = 2.0 * float(sums.budgets.max()) if len(sums.budgets) else 0.0
    return z, per_char


def n_q(q: int, y: Optional[int] = None, config=Config) -> NqEstimate:
    """
    N_q = sum over chi != chi0 of the zero sums, with accumulated smoothing budget.

    Raises:
        DomainError: q < 3
        PreconditionError: y < q
        DegenerateContextError: the estimate is not positive
    """
    q = check_modulus(q)
    y = int(y if y is not None else default_smoothing(q, config))
    z, per_char = zero_sums(q, y, config=config)
    value = float(z.sum())
    budget = (len(z) - 1) * per_char
    if value <= 0:
        raise DegenerateContextError(
            f"N_q estimate for q={q} is not positive ({value:.6g})",
            suggestion="Increase the smoothing parameter y",
        )
    return NqEstimate(q=q, y=y, value=value, error_budget=budget)


class _CharRouteTable:
    """B_q(a, b) depends on a/b only: Bu[u] = sum_{chi != chi0} chi(u) Z_chi for every unit u."""

    def __init__(self, q: int, y: int, config=Config):
        group = character_group(q)
        z, per_char = zero_sums(q, y, config=config)
        bu = np.fft.ifftn(z.reshape(group.orders)).ravel() * group.phi
        residual = float(np.abs(bu.imag).max()) if len(bu) else 0.0
        if residual > 1e-9 * group.phi:
            raise NumericalError(
                f"Character-route B for q={q} has imaginary residual {residual:.3g}",
                suggestion="The zero sums are not conjugation-symmetric; clear the cache",
            )
        self.group = group
        self.values = bu.real
        self.imag_residual = residual
        self.error_budget = (group.phi - 1) * per_char

    def __call__(self, a: int, b: int) -> float:
        q = self.group.q
        ratio = a * pow(b, -1, q) % q
        return float(self.values[self.group.index_of[ratio]])


def _char_table_key(q: int, y: int, config=Config) -> Tuple:
    # settings read while building the table; class attributes may be mutated later
    return (
        q,
        y,
        config,
        bool(config.ZERO_SUM_LOG_PI),
        float(config.TRUNCATION_FACTOR),
        tuple(sorted(config.calibration_snapshot().items())),
    )


@memoize_once(max_entries=16, key=_char_table_key)
def _char_table(q: int, y: int, config=Config) -> _CharRouteTable:
    return _CharRouteTable(q, y, config=config)


def b_q_char_route(ctx: "SpectralContext", a: int, b: int) -> BValue:
    """
    B_q(a, b) from the twisted per-character zero sums.

    Raises:
        DomainError: a = b mod q, or either is not a unit
    """
    a, b = _pair(ctx.q, a, b)
    table = _char_table(ctx.q, ctx.y, ctx.config)
    return BValue(q=ctx.q, a=a, b=b, value=table(a, b), route="char", error_budget=table.error_budget)


# =============================================================================
# Residue route
# =============================================================================


def validation_x(q: int) -> float:
    """x = (q log q)^2."""
    return (q * math.log(q)) ** 2


@dataclass(frozen=True)
class _LocalPowers:
    """For one p^nu || q: p^e mod q/p^nu and log(p)/(p^(e+nu-1)(p-1)) for 1 <= e <= 2 log x."""

    prime: int
    modulus: int
    powers: np.ndarray
    weights: np.ndarray


@memoize_once(max_entries=64)
def _local_powers(q: int) -> Tuple[_LocalPowers, ...]:
    e_max = int(2 * math.log(validation_x(q)))
    tables = []
    for p, nu in factorint(q).items():
        m = q // p ** nu
        e = np.arange(1, e_max + 1)
        powers = np.array([pow(p, int(k), m) if m > 1 else 0 for k in e], dtype=np.int64)
        weights = math.log(p) / (p - 1) * np.power(float(p), -(e + nu - 1).astype(np.float64))
        tables.append(_LocalPowers(prime=p, modulus=m, powers=powers, weights=weights))
    return tuple(tables)


def _local_correction(q: int, a: int, b: int) -> float:
    """sum over p^nu || q and e with a p^e = b mod q/p^nu of log p / (p^(e+nu-1)(p-1))."""
    total = 0.0
    for t in _local_powers(q):
        if t.modulus == 1:
            total += float(t.weights.sum())
            continue
        hit = (a * t.powers - b) % t.modulus == 0
        total += float(t.weights[hit].sum())
    return total


@memoize_once(max_entries=8)
def _progression_weights(q: int, y: int, limit: int) -> np.ndarray:
    """T[s] = sum_{n = s mod q} Lambda(n)/n e^{-n/y}, n <= limit."""
    n, _, w = prime_power_weights(float(y), limit)
    return np.bincount(n % q, weights=w, minlength=q)


def b_q_residue_route(
    q: int,
    a: int,
    b: int,
    accelerated: bool = True,
    y: Optional[int] = None,
    config=Config,
) -> BValue:
    """
    B_q(a, b) from residues alone.

    4 log q - phi(q)[ l_q(a,b) log 2 + Lambda(q/g)/phi(q/g) + P(s1) + P(s2)
    + local corrections ], with g = (q, a - b), s1 and s2 the least positive
    residues of b/a and a/b. With ``accelerated`` the progression sums P(s)
    are replaced by their first term Lambda(s)/s; otherwise they are summed
    in full with smoothing y (default min((q log q)^2, SMOOTHING_Y_CAP)).
    """
    q = check_modulus(q)
    a, b = _pair(q, a, b)
    ph = phi(q)
    s1 = b * pow(a, -1, q) % q
    s2 = a * pow(b, -1, q) % q
    ell = 1 if (a + b) % q == 0 else 0
    m = q // math.gcd(q, a - b)
    bracket = ell * math.log(2.0) + von_mangoldt(m) / phi(m)

    if accelerated:
        bracket += von_mangoldt(s1) / s1 + von_mangoldt(s2) / s2
        size = abs(signed_rep(a, q)) + abs(signed_rep(b, q))
        budget = config.Calibration.RESIDUE_ROUTE_C * size * math.log(q) ** 2 / q
        route = "residue"
    else:
        y = int(y if y is not None else min(validation_x(q), config.SMOOTHING_Y_CAP))
        weights = _progression_weights(q, y, truncation_limit(y, config=config))
        bracket += float(weights[s1] + weights[s2])
        budget = tail_bound(q, y, config=config)
        route = "residue-full"

    bracket += _local_correction(q, a, b) + _local_correction(q, b, a)
    value = 4.0 * math.log(q) - ph * bracket
    return BValue(q=q, a=a, b=b, value=value, route=route, error_budget=budget)


def predicted_b_small(q: int, a: int, b: int) -> float:
    """
    Leading term of B_q(a, b) for residues small next to q, read on signed
    representatives: -phi(q) log 2 when a = -b, -phi(q) Lambda_0(max/min)
    for a same-sign pair, and 0 for any other opposite-sign pair.
    """
    q = check_modulus(q)
    a, b = _pair(q, a, b)
    sa, sb = signed_rep(a, q), signed_rep(b, q)
    if sa == -sb:
        return -phi(q) * math.log(2.0)
    if (sa > 0) != (sb > 0):
        return 0.0
    big, small = max(abs(sa), abs(sb)), min(abs(sa), abs(sb))
    return -phi(q) * lambda0(Fraction(big, small))


@dataclass(frozen=True)
class SmallBResidual:
    """B_q(a, b) against its small-residue prediction."""

    q: int
    a: int
    b: int
    value: float
    predicted: float
    bound: float

    @property
    def residual(self) -> float:
        return self.value - self.predicted

    @property
    def within_bound(self) -> bool:
        return abs(self.residual) <= self.bound

    def to_dict(self) -> dict:
        return {
            "predicted": self.predicted,
            "residual": self.residual,
            "bound": self.bound,
            "within_bound": self.within_bound,
        }


def small_b_residual(ctx: SpectralContext, a: int, b: int) -> SmallBResidual:
    """
    Compare B_q(a, b) with ``predicted_b_small``; the remainder is bounded by
    c log(q)^2 with c = Calibration.SMALL_B_C while a and b stay small.
    """
    value = ctx.b(a, b)
    bound = ctx.config.Calibration.SMALL_B_C * math.log(ctx.q) ** 2
    check = SmallBResidual(
        q=ctx.q,
        a=value.a,
        b=value.b,
        value=value.value,
        predicted=predicted_b_small(ctx.q, value.a, value.b),
        bound=bound,
    )
    run_logger.calibration_check("SMALL_B_C", abs(check.residual), bound, q=ctx.q, a=check.a, b=check.b)
    return check


# =============================================================================
# Context
# =============================================================================


@dataclass(frozen=True)
class SpectralContext:
    """
    Everything a density evaluator needs about one modulus.

    Immutable once built; B values are memoized per (a, b) with at-most-once
    computation, so a context can be shared across threads.
    """

    q: int
    phi: int
    n_q: float
    n_q_budget: float
    y: int
    x: float
    route: str
    gamma0: float = GAMMA0
    config: type = field(default=Config, repr=False, compare=False)
    _b_cache: OnceCache = field(default_factory=OnceCache, repr=False, compare=False)

    @classmethod
    def build(cls, q: int, y: Optional[int] = None, route: Optional[str] = None, config=Config) -> "SpectralContext":
        """
        Build the context for q.

        Raises:
            DomainError: q < 3 or an unknown route
            DegenerateContextError: N_q is not positive
        """
        q = check_modulus(q)
        route = route or config.B_ROUTE
        if route not in ROUTES:
            raise DomainError(f"Unknown B route: {route}", suggestion=f"Use one of: {', '.join(ROUTES)}")
        nq = n_q(q, y, config=config)
        ctx = cls(
            q=q,
            phi=phi(q),
            n_q=nq.value,
            n_q_budget=nq.error_budget,
            y=nq.y,
            x=validation_x(q),
            route=route,
            config=config,
        )
        run_logger.context_built(q, route, n_q=nq.value, y=nq.y)
        return ctx

    def b(self, a: int, b: int) -> BValue:
        """B_q(a, b) on the context's route; symmetric by construction."""
        a, b = _pair(self.q, a, b)
        lo, hi = min(a, b), max(a, b)

        def compute() -> BValue:
            if self.route == "char":
                return b_q_char_route(self, lo, hi)
            return b_q_residue_route(self.q, lo, hi, config=self.config)

        value = self._b_cache.get_or_compute((lo, hi), compute)
        if (value.a, value.b) == (a, b):
            return value
        return BValue(q=self.q, a=a, b=b, value=value.value, route=value.route, error_budget=value.error_budget)

    def c(self, a: int) -> int:
        return chebyshev_c(a, self.q)

    def b_matrix(self, residues: Iterable[int]) -> np.ndarray:
        """Symmetric matrix of B(a_j, a_k) with zero diagonal."""
        residues = list(residues)
        r = len(residues)
        matrix = np.zeros((r, r))
        for j in range(r):
            for k in range(j + 1, r):
                matrix[j, k] = matrix[k, j] = self.b(residues[j], residues[k]).value
        return matrix

    def b_budget(self, residues: Iterable[int]) -> float:
        residues = list(residues)
        return max(
            (self.b(residues[j], residues[k]).error_budget for j in range(len(residues)) for k in range(j + 1, len(residues))),
            default=0.0,
        )


def v_q(ctx: SpectralContext, a1: int, a2: int) -> float:
    """V_q(a1, a2) = 2 N_q - 2 B_q(a1, a2)."""
    return 2.0 * ctx.n_q - 2.0 * ctx.b(a1, a2).value


# =============================================================================
# All pairs
# =============================================================================


def iter_pairs(q: int) -> Iterator[Tuple[int, int]]:
    """Ordered pairs of distinct reduced residues mod q."""
    reduced = [int(u) for u in units(q)]
    for a in reduced:
        for b in reduced:
            if a != b:
                yield a, b


def all_b_values(ctx: SpectralContext, route: Optional[str] = None) -> List[BValue]:
    """B_q(a, b) over every ordered pair, on ``route`` (default: the context's)."""
    route = route or ctx.route
    if route == "char":
        return [b_q_char_route(ctx, a, b) for a, b in iter_pairs(ctx.q)]
    return [b_q_residue_route(ctx.q, a, b, config=ctx.config) for a, b in iter_pairs(ctx.q)]


@dataclass(frozen=True)
class AverageB:
    q: int
    route: str
    pairs: int
    mean: float
    mean_abs: float

    @property
    def ratio_to_log_q(self) -> float:
        return self.mean_abs / math.log(self.q)


def average_b(ctx: SpectralContext, route: Optional[str] = None) -> AverageB:
    """Mean of B and of |B| over all ordered pairs of distinct reduced residues."""
    route = route or ctx.route
    if route == "char":
        # every u != 1 occurs as a/b for exactly phi(q) ordered pairs
        table = _char_table(ctx.q, ctx.y, ctx.config)
        one = table.group.index_of[1]
        others = np.delete(table.values, one)
        pairs = ctx.phi * (ctx.phi - 1)
        return AverageB(q=ctx.q, route=route, pairs=pairs, mean=float(others.mean()), mean_abs=float(np.abs(others).mean()))
    values = np.array([v.value for v in all_b_values(ctx, route)])
    return AverageB(q=ctx.q, route=route, pairs=len(values), mean=float(values.mean()), mean_abs=float(np.abs(values).mean()))


def large_b_is_negative(ctx: SpectralContext, pairs: Optional[Iterable[Tuple[int, int]]] = None) -> bool:
    """True when every B_q(a, b) with |B| > 5 log q over ``pairs`` is negative."""
    threshold = 5.0 * math.log(ctx.q)
    pairs = pairs if pairs is not None else iter_pairs(ctx.q)
    bad = [(a, b) for a, b in pairs if ctx.b(a, b).value > threshold]
    if bad:
        logger.warning(f"q={ctx.q}: {len(bad)} pairs with large positive B, first {bad[0]}")
    return not bad


def check_phi_bound(ctx: SpectralContext, values: Iterable[BValue]) -> bool:
    """|B| <= c phi(q) for every value, c = Calibration.B_PHI_C."""
    bound = ctx.config.Calibration.B_PHI_C * ctx.phi
    worst = max((abs(v.value) for v in values), default=0.0)
    run_logger.calibration_check("B_PHI_C", worst, bound, q=ctx.q)
    return worst <= bound


def export_b_matrix(ctx: SpectralContext, path: Path, route: Optional[str] = None) -> Path:
    """Write every B_q(a, b) as CSV with header a,b,B,route,error_budget."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(ctx.config.Internal.B_MATRIX_HEADER)
        for value in all_b_values(ctx, route):
            writer.writerow([value.a, value.b, repr(value.value), value.route, repr(value.error_budget)])
    logger.info(f"Wrote B matrix for q={ctx.q} to {path}")
    return path


__all__ = [
    "GAMMA0",
    "ROUTES",
    "BValue",
    "NqEstimate",
    "AverageB",
    "SpectralContext",
    "zero_sums",
    "n_q",
    "b_q_char_route",
    "b_q_residue_route",
    "predicted_b_small",
    "SmallBResidual",
    "small_b_residual",
    "validation_x",
    "v_q",
    "iter_pairs",
    "all_b_values",
    "average_b",
    "large_b_is_negative",
    "check_phi_bound",
    "export_b_matrix",
]
