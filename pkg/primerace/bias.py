"""
PRIMERACE Bias

Classification of races, extreme-bias witnesses, the explicit biased
tuple constructions and the bias-factor counterexamples.

Constructions work with the auxiliary primes of q: p0 (a non-square),
p1 < p2 (coprime to q). Entries are products m * (p1 p2)^e reduced mod q;
when two entries collide mod q the exponent of a movable entry is raised
by 2r (keeping its square class) and the adjustment is recorded.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import nextprime

from primerace.arith import aux_primes, check_modulus, cube_root_condition, is_square_mod, lambda0
from primerace.config import Config
from primerace.densities import RaceTuple, density_series
from primerace.errors import ConstructionError, DomainError, PreconditionError
from primerace.logging import run_logger
from primerace.simplex import SimplexCoefficients, coefficient_table
from primerace.spectral import SpectralContext

logger = logging.getLogger(__name__)

SYMMETRIC = "symmetric-unbiased-candidate"
BIASED = "biased"
EXTREME = "q-extreme-predicted"
UNBIASED = "unbiased"

VARIANTS = ("mixed", "squares", "nonsquares")

_WITNESS_TOL = 1e-12
_MAX_ADJUSTMENTS = 32


# =============================================================================
# Witnesses
# =============================================================================


@dataclass(frozen=True)
class Witness:
    """
    Why a tuple is extremely biased.

    kind "opposite-pair": ``indices`` is a pair with a_j + a_k = 0.
    kind "prime-power-ratio": ``indices`` is a triple and ``permutation``
    orders its three pair weights X so that L(X_s1) + L(X_s2) - 2 L(X_s3) = value != 0.
    """

    kind: str
    indices: Tuple[int, ...]
    permutation: Tuple[int, ...] = ()
    value: float = 0.0


def _pair_weight(a: int, b: int) -> float:
    """Lambda_0(max/min) of |a|, |b| for a same-sign pair, 0 for opposite signs."""
    if (a > 0) != (b > 0):
        return 0.0
    big, small = max(abs(a), abs(b)), min(abs(a), abs(b))
    return lambda0(Fraction(big, small))


def extreme_bias_witness(values: Sequence[int]) -> Optional[Witness]:
    """
    Search a list of distinct nonzero integers for an extreme-bias witness.

    An opposite pair wins outright. Otherwise each triple (i1 < i2 < i3) is
    scored with X_1 = pair(i1, i2), X_2 = pair(i2, i3), X_3 = pair(i1, i3)
    and every ordering s of (X_1, X_2, X_3) is tried.

    Raises:
        DomainError: fewer than three values, a zero, or repeated values
    """
    values = [int(v) for v in values]
    if len(values) < 3:
        raise DomainError(f"Witness search needs r >= 3, got r={len(values)}")
    if 0 in values or len(set(values)) != len(values):
        raise DomainError(f"Values {values} must be distinct and nonzero")

    for j, k in itertools.combinations(range(len(values)), 2):
        if values[j] + values[k] == 0:
            return Witness(kind="opposite-pair", indices=(j, k))

    for i1, i2, i3 in itertools.combinations(range(len(values)), 3):
        x = (
            _pair_weight(values[i1], values[i2]),
            _pair_weight(values[i2], values[i3]),
            _pair_weight(values[i1], values[i3]),
        )
        if not any(x):
            continue
        for perm in itertools.permutations(range(3)):
            score = x[perm[0]] + x[perm[1]] - 2.0 * x[perm[2]]
            if abs(score) > _WITNESS_TOL:
                return Witness(
                    kind="prime-power-ratio",
                    indices=(i1, i2, i3),
                    permutation=tuple(p + 1 for p in perm),
                    value=score,
                )
    return None


# =============================================================================
# Classification
# =============================================================================


@dataclass(frozen=True)
class BiasVerdict:
    classification: str
    witness: Optional[Witness]
    threshold: float
    margin: Optional[float] = None
    reasons: Tuple[str, ...] = ()

    def to_dict(self) -> Dict:
        witness = None
        if self.witness is not None:
            witness = {
                "kind": self.witness.kind,
                "indices": list(self.witness.indices),
                "permutation": list(self.witness.permutation),
                "value": self.witness.value,
            }
        return {
            "classification": self.classification,
            "witness": witness,
            "threshold": self.threshold,
            "margin": self.margin,
            "reasons": list(self.reasons),
        }


def _evaluator_margin(ctx: SpectralContext, race: RaceTuple) -> float:
    """max over orderings of |delta - 1/r!| under the series evaluator."""
    coeffs = coefficient_table(race.r, config=ctx.config)
    baseline = 1.0 / math.factorial(race.r)
    return max(
        abs(density_series(ctx, coeffs, race.permuted(order)).delta - baseline)
        for order in itertools.permutations(range(race.r))
    )


def _margin_reasons(margin: Optional[float], threshold: float) -> Tuple[str, ...]:
    if margin is None:
        return ()
    if margin >= threshold:
        return (f"evaluator margin {margin:.4g} >= threshold {threshold:.4g}",)
    return (f"evaluator margin {margin:.4g} < threshold {threshold:.4g}, not confirmed at this q",)


def classify_bias(race: RaceTuple, ctx: Optional[SpectralContext] = None, config=Config) -> BiasVerdict:
    """
    Classify a race from its residues.

    r = 3 with cube-root symmetry is a symmetric unbiased candidate. For
    r >= 3 an opposite pair or a same-sign pair whose ratio is a prime
    power (read on signed representatives) predicts q-extreme bias. Any
    other race is biased, except r = 2 with equal C_q, which is unbiased.
    With a context the evaluator margin max |delta - 1/r!| is reported for
    r <= 5 and compared with the q-extreme threshold EXTREME_TAU/log(q).
    """
    q = race.q
    threshold = config.Calibration.EXTREME_TAU / math.log(q)
    margin = _evaluator_margin(ctx, race) if ctx is not None and race.r <= 5 else None

    if race.r == 3 and cube_root_condition(*race.entries, q):
        return BiasVerdict(SYMMETRIC, None, threshold, margin, ("a2 = a1 rho, a3 = a1 rho^2 with rho^3 = 1",))

    if race.r == 2:
        c1, c2 = race.c_values
        if c1 == c2:
            return BiasVerdict(UNBIASED, None, threshold, margin, ("both entries have the same square class",))
        return BiasVerdict(BIASED, None, threshold, margin, ("a square races a non-square",))

    witness = extreme_bias_witness(race.signed)
    if witness is not None:
        reason = "opposite pair" if witness.kind == "opposite-pair" else "prime-power ratio"
        return BiasVerdict(EXTREME, witness, threshold, margin, (reason,) + _margin_reasons(margin, threshold))

    reasons = ("mixed squares and non-squares",) if not race.same_type else ("no symmetry, no large B term",)
    return BiasVerdict(BIASED, None, threshold, margin, reasons + _margin_reasons(margin, threshold))


# =============================================================================
# Bias factor
# =============================================================================


def bias_factor(coeffs: SimplexCoefficients, race: RaceTuple) -> float:
    """-sum_j alpha_j C_q(a_j)."""
    if coeffs.r != race.r:
        raise DomainError(f"Coefficient table is for r={coeffs.r}, tuple has r={race.r}")
    return -float(np.dot(coeffs.alpha, np.array(race.c_values, dtype=np.float64)))


@dataclass(frozen=True)
class RankingCheck:
    applies: bool
    consistent: bool
    factor_a: float
    factor_b: float
    delta_a: float
    delta_b: float


def ranking_consistent(
    ctx: SpectralContext,
    coeffs: SimplexCoefficients,
    a: RaceTuple,
    b: RaceTuple,
) -> RankingCheck:
    """
    When every |B| of both tuples is at most sqrt(phi(q)) and the bias
    factor of ``a`` exceeds that of ``b`` by more than 2/sqrt(log q), the
    evaluator must rank delta(a) above delta(b).
    """
    bound = math.sqrt(ctx.phi)
    small_b = all(
        abs(ctx.b(t.entries[j], t.entries[k]).value) <= bound
        for t in (a, b)
        for j, k in itertools.combinations(range(t.r), 2)
    )
    fa, fb = bias_factor(coeffs, a), bias_factor(coeffs, b)
    applies = small_b and fa - fb > 2.0 / math.sqrt(math.log(ctx.q))
    da = density_series(ctx, coeffs, a).delta
    db = density_series(ctx, coeffs, b).delta
    return RankingCheck(applies=applies, consistent=(not applies) or da > db, factor_a=fa, factor_b=fb, delta_a=da, delta_b=db)


# =============================================================================
# Constructions
# =============================================================================


@dataclass(frozen=True)
class _Slot:
    """Entry m * (p1 p2)^exponent; a None exponent means the entry is fixed."""

    multiplier: int
    exponent: Optional[int] = None


def nonsquare_unit(q: int) -> int:
    """Smallest prime that is a unit and a non-square mod q."""
    ell = 2
    while math.gcd(ell, q) != 1 or is_square_mod(ell, q):
        ell = int(nextprime(ell))
        if ell > q:
            raise ConstructionError(f"No prime non-square unit below q={q}")
    return ell


def _assemble(q: int, r: int, slots: List[_Slot], base: int, label: str, adjustments: List[str]) -> RaceTuple:
    slots = list(slots)
    for _ in range(_MAX_ADJUSTMENTS):
        residues = [
            (s.multiplier * pow(base, s.exponent, q)) % q if s.exponent is not None else s.multiplier % q
            for s in slots
        ]
        seen: Dict[int, int] = {}
        clash = None
        for pos, value in enumerate(residues):
            if math.gcd(value, q) != 1:
                raise ConstructionError(
                    f"Entry {pos + 1} of {label} is not a unit mod {q}",
                    suggestion="Choose a modulus coprime to the auxiliary primes",
                )
            if value in seen:
                clash = (seen[value], pos)
                break
            seen[value] = pos
        if clash is None:
            return RaceTuple.of(q, residues)
        movable = [p for p in reversed(clash) if slots[p].exponent is not None]
        if not movable:
            raise ConstructionError(
                f"Fixed entries {clash[0] + 1} and {clash[1] + 1} of {label} coincide mod {q}",
                suggestion="q is too small for this construction",
            )
        pos = movable[0]
        old = slots[pos].exponent
        slots[pos] = _Slot(slots[pos].multiplier, old + 2 * r)
        adjustments.append(f"{label}[{pos + 1}]: exponent {old} -> {old + 2 * r}")
    raise ConstructionError(
        f"Could not separate the entries of {label} mod {q}",
        suggestion="q is too small for this construction",
    )


@dataclass(frozen=True)
class Construction:
    """A biased tuple, its swapped order and the predicted signs of delta - 1/r!."""

    q: int
    r: int
    variant: str
    race: RaceTuple
    swapped: RaceTuple
    predicted_sign: int
    swapped_sign: int
    adjustments: Tuple[str, ...] = ()
    notes: Tuple[str, ...] = ()

    def to_dict(self) -> Dict:
        return {
            "q": self.q,
            "r": self.r,
            "variant": self.variant,
            "tuple": list(self.race.entries),
            "signed": list(self.race.signed),
            "predicted_sign": self.predicted_sign,
            "swapped": list(self.swapped.entries),
            "swapped_sign": self.swapped_sign,
            "adjustments": list(self.adjustments),
            "notes": list(self.notes),
        }


def _check_r(q: int, r: int) -> None:
    if r < 3:
        raise DomainError(f"Biased constructions need r >= 3, got r={r}")
    if r > Config.Internal.MAX_SIMPLEX_R:
        raise DomainError(f"r={r} exceeds {Config.Internal.MAX_SIMPLEX_R}")


def construct_biased_tuple(q: int, r: int, variant: str = "mixed") -> Construction:
    """
    A tuple whose single large B term sits between positions 1 and r.

    mixed       (1, (p1p2)^4, ..., (p1p2)^(2(r-1)), -1)
    squares     (1, (p1p2)^4, ..., (p1p2)^(2(r-1)), p1^2)
    nonsquares  the squares tuple times the least prime non-square unit

    delta - 1/r! is positive for the returned order and negative once
    positions 1 and r-1 are exchanged.

    Raises:
        DomainError: r < 3 or an unknown variant
        ConstructionError: entries cannot be made distinct units mod q
    """
    q = check_modulus(q)
    _check_r(q, r)
    if variant not in VARIANTS:
        raise DomainError(f"Unknown construction variant: {variant}", suggestion=f"Use one of: {', '.join(VARIANTS)}")
    aux = aux_primes(q)
    base = aux.p1 * aux.p2
    middle = [_Slot(1, 2 * j) for j in range(2, r)]
    notes: List[str] = []

    if variant == "mixed":
        slots = [_Slot(1)] + middle + [_Slot(-1)]
    else:
        slots = [_Slot(1)] + middle + [_Slot(aux.p1 ** 2)]
        if variant == "nonsquares":
            u = nonsquare_unit(q)
            slots = [_Slot(u * s.multiplier, s.exponent) for s in slots]
            notes.append(f"entries multiplied by the non-square {u}")

    if is_square_mod(q - 1, q):
        notes.append("-1 is a square mod q: the deviation is of order 1/log q for every variant")

    adjustments: List[str] = []
    race = _assemble(q, r, slots, base, variant, adjustments)
    order = list(range(r))
    order[0], order[r - 2] = order[r - 2], order[0]
    if adjustments:
        run_logger.construction_adjusted(q, variant, adjustments)
    return Construction(
        q=q, r=r, variant=variant, race=race, swapped=race.permuted(order),
        predicted_sign=1, swapped_sign=-1,
        adjustments=tuple(adjustments), notes=tuple(notes),
    )


@dataclass(frozen=True)
class Counterexample:
    """Tuples with sum kappa_j C(a_j) > sum kappa_j C(b_j) but delta(a) < delta(b)."""

    q: int
    kappa: Tuple[float, ...]
    case: str
    a: RaceTuple
    b: RaceTuple
    adjustments: Tuple[str, ...] = ()

    def kappa_gap(self) -> float:
        """sum kappa_j C(a_j) - sum kappa_j C(b_j)."""
        ca = np.array(self.a.c_values, dtype=np.float64)
        cb = np.array(self.b.c_values, dtype=np.float64)
        return float(np.dot(self.kappa, ca - cb))

    def to_dict(self) -> Dict:
        return {
            "q": self.q,
            "kappa": list(self.kappa),
            "case": self.case,
            "a": list(self.a.entries),
            "b": list(self.b.entries),
            "kappa_gap": self.kappa_gap(),
            "adjustments": list(self.adjustments),
        }


def bias_factor_counterexample(q: int, r: int, kappa: Sequence[float]) -> Counterexample:
    """
    Build (a, b) refuting the linear bias factor sum kappa_j C_q(a_j).

    The first nonzero of kappa_r, kappa_1, kappa_l (1 < l < r) selects the
    case; its sign selects the tuples.

    Raises:
        PreconditionError: kappa is zero
        DomainError: len(kappa) != r or r < 3
    """
    q = check_modulus(q)
    _check_r(q, r)
    kappa = tuple(float(k) for k in kappa)
    if len(kappa) != r:
        raise DomainError(f"kappa has {len(kappa)} entries, expected r={r}")
    if not any(kappa):
        raise PreconditionError("kappa must not be the zero vector", suggestion="Give at least one nonzero weight")

    aux = aux_primes(q)
    base = aux.p1 * aux.p2
    p0 = aux.p0 if math.gcd(aux.p0, q) == 1 else nonsquare_unit(q)
    p1_sq = aux.p1 ** 2

    if kappa[r - 1] != 0 or kappa[0] != 0:
        weight = kappa[r - 1] if kappa[r - 1] != 0 else kappa[0]
        a_slots = [_Slot(1)] + [_Slot(p0, 2 * j) for j in range(2, r)]
        if weight > 0:
            a_slots.append(_Slot(1, 2))
            b_slots = a_slots[:-1] + [_Slot(p0)]
        else:
            a_slots.append(_Slot(p0, 2 * r))
            b_slots = a_slots[:-1] + [_Slot(p1_sq)]
        if kappa[r - 1] == 0:
            a_slots[0], a_slots[-1] = a_slots[-1], a_slots[0]
            b_slots[0], b_slots[-1] = b_slots[-1], b_slots[0]
            case = "first-position"
        else:
            case = "last-position"
        case += ", positive" if weight > 0 else ", negative"
    else:
        l = next(i for i in range(1, r - 1) if kappa[i] != 0)
        if kappa[l] > 0:
            a_slots = [_Slot(1)] + [_Slot(1, 2) if j == l else _Slot(p0, 4 * (j + 1)) for j in range(1, r)]
            b_slots = list(a_slots)
            b_slots[l] = _Slot(p0, 4 * (l + 1))
            b_slots[r - 1] = _Slot(p0)
            case = f"middle-position {l + 1}, positive"
        else:
            a_slots = [_Slot(1)] + [_Slot(p0, 4 * (j + 1)) for j in range(1, r - 1)] + [_Slot(1, 4)]
            b_slots = list(a_slots)
            b_slots[l] = _Slot(1, 4)
            b_slots[r - 1] = _Slot(p1_sq)
            case = f"middle-position {l + 1}, negative"

    adjustments: List[str] = []
    a = _assemble(q, r, a_slots, base, "a", adjustments)
    b = _assemble(q, r, b_slots, base, "b", adjustments)
    if adjustments:
        run_logger.construction_adjusted(q, "counterexample", adjustments)
    return Counterexample(q=q, kappa=kappa, case=case, a=a, b=b, adjustments=tuple(adjustments))


__all__ = [
    "SYMMETRIC",
    "BIASED",
    "EXTREME",
    "UNBIASED",
    "VARIANTS",
    "Witness",
    "BiasVerdict",
    "RankingCheck",
    "Construction",
    "Counterexample",
    "extreme_bias_witness",
    "classify_bias",
    "bias_factor",
    "ranking_consistent",
    "nonsquare_unit",
    "construct_biased_tuple",
    "bias_factor_counterexample",
]
