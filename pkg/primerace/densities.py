"""
PRIMERACE Densities

Evaluators for the logarithmic density of a race ordering
pi(x; q, a_1) > ... > pi(x; q, a_r):

    series       the four-term expansion in N_q, C_q and B_q
    first_order  the series without the quadratic C-terms
    same_type    all squares or all non-squares: only the beta-B term remains
    three_way    the r = 3 closed form
    two_way      1/2 - (C_q(a1) - C_q(a2)) / sqrt(2 pi V_q(a1, a2))
    surrogate_mc probability of the ordering under the Gaussian with mean
                 -C_q(a_j) and covariance N_q (diagonal), B_q (off-diagonal)

Every report carries its terms, an explicit error budget and the
calibration constants it was computed with.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import norm

from primerace.arith import check_modulus, chebyshev_c, phi, require_unit, signed_rep
from primerace.config import Config
from primerace.errors import DegenerateContextError, DomainError
from primerace.logging import run_logger
from primerace.simplex import SimplexCoefficients, coefficient_table
from primerace.spectral import SpectralContext, v_q

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RaceTuple:
    """An ordered tuple of distinct reduced residues mod q."""

    q: int
    entries: Tuple[int, ...]

    @classmethod
    def of(cls, q: int, entries: Iterable[int]) -> "RaceTuple":
        """
        Validate and reduce the entries mod q.

        Raises:
            DomainError: fewer than two entries, more than phi(q), a non-unit,
                or two entries equal mod q
        """
        q = check_modulus(q)
        raw = [int(a) for a in entries]
        if len(raw) < 2:
            raise DomainError("A race needs at least two residues", suggestion="Pass two or more classes")
        if len(raw) > phi(q):
            raise DomainError(f"r={len(raw)} exceeds phi({q}) = {phi(q)}")
        reduced = tuple(require_unit(a, q) for a in raw)
        if len(set(reduced)) != len(reduced):
            raise DomainError(
                f"Residues {raw} are not pairwise distinct mod {q}",
                suggestion="Each competitor must be a different residue class",
            )
        return cls(q=q, entries=reduced)

    @property
    def r(self) -> int:
        return len(self.entries)

    @property
    def signed(self) -> Tuple[int, ...]:
        return tuple(signed_rep(a, self.q) for a in self.entries)

    @property
    def c_values(self) -> Tuple[int, ...]:
        return tuple(chebyshev_c(a, self.q) for a in self.entries)

    @property
    def squares(self) -> Tuple[bool, ...]:
        return tuple(c >= 0 for c in self.c_values)

    @property
    def same_type(self) -> bool:
        return len(set(self.squares)) == 1

    def permuted(self, order: Sequence[int]) -> "RaceTuple":
        return RaceTuple(q=self.q, entries=tuple(self.entries[i] for i in order))

    def reversed(self) -> "RaceTuple":
        return RaceTuple(q=self.q, entries=self.entries[::-1])


@dataclass(frozen=True)
class DensityTerms:
    baseline: float
    alpha_term: float = 0.0
    beta_term: float = 0.0
    c2_term: float = 0.0

    @property
    def total(self) -> float:
        return self.baseline + self.alpha_term + self.beta_term + self.c2_term


@dataclass(frozen=True)
class DensityReport:
    """One evaluated density with its breakdown and error budget."""

    race: RaceTuple
    method: str
    delta: float
    terms: DensityTerms
    error_budget: float
    degenerate: bool = False
    seed: Optional[int] = None
    samples: Optional[int] = None
    std_error: Optional[float] = None
    closed_form: Optional[float] = None
    coefficient_errors: float = 0.0
    calibration: Dict[str, float] = field(default_factory=dict)
    notes: Tuple[str, ...] = ()

    @property
    def deviation(self) -> float:
        return self.delta - 1.0 / math.factorial(self.race.r)

    def to_dict(self) -> Dict:
        return {
            "q": self.race.q,
            "tuple": list(self.race.entries),
            "r": self.race.r,
            "method": self.method,
            "delta": self.delta,
            "terms": asdict(self.terms),
            "error_budget": self.error_budget,
            "degenerate": self.degenerate,
            "seed": self.seed,
            "samples": self.samples,
            "std_error": self.std_error,
            "closed_form": self.closed_form,
            "coefficient_errors": self.coefficient_errors,
            "calibration": dict(self.calibration),
            "notes": list(self.notes),
        }


def _coeffs_for(race: RaceTuple, coeffs: Optional[SimplexCoefficients], config=Config) -> SimplexCoefficients:
    if coeffs is None:
        return coefficient_table(race.r, config=config)
    if coeffs.r != race.r:
        raise DomainError(f"Coefficient table is for r={coeffs.r}, tuple has r={race.r}")
    return coeffs


def _check_context(ctx: SpectralContext, race: RaceTuple) -> None:
    if ctx.q != race.q:
        raise DomainError(f"Context is for q={ctx.q}, tuple is mod {race.q}")


def _finish(
    ctx: SpectralContext,
    race: RaceTuple,
    method: str,
    terms: DensityTerms,
    budget: float,
    coefficient_errors: float = 0.0,
    notes: Tuple[str, ...] = (),
    **extra,
) -> DensityReport:
    degenerate = budget >= 1.0 / math.factorial(race.r)
    if degenerate:
        run_logger.degenerate(ctx.q, method, budget, tuple=list(race.entries))
        notes = notes + (f"error budget {budget:.3g} is not below 1/r!; the expansion is outside its regime",)
    return DensityReport(
        race=race,
        method=method,
        delta=terms.total,
        terms=terms,
        error_budget=budget,
        degenerate=degenerate,
        coefficient_errors=coefficient_errors,
        calibration=ctx.config.calibration_snapshot(),
        notes=notes,
        **extra,
    )


def _series_parts(ctx: SpectralContext, coeffs: SimplexCoefficients, race: RaceTuple):
    c = np.array(race.c_values, dtype=np.float64)
    b = ctx.b_matrix(race.entries)
    upper = np.triu_indices(race.r, k=1)
    n = ctx.n_q
    alpha_term = -float(np.dot(coeffs.alpha, c)) / math.sqrt(n)
    beta_term = float(np.sum(coeffs.beta[upper] * b[upper])) / n
    c2_term = (float(np.dot(coeffs.lam, c * c)) + 2.0 * float(np.sum(coeffs.beta[upper] * np.outer(c, c)[upper]))) / (2.0 * n)
    c_max = float(np.abs(c).max())
    b_max = float(np.abs(b[upper]).max()) if race.r > 1 else 0.0

    # propagated coefficient and B-budget errors
    coef_err = (
        float(np.dot(coeffs.alpha_err, np.abs(c))) / math.sqrt(n)
        + float(np.sum(coeffs.beta_err[upper] * (np.abs(b[upper]) + np.abs(np.outer(c, c)[upper])))) / n
        + float(np.dot(coeffs.lambda_err, c * c)) / (2.0 * n)
    )
    b_err = float(np.sum(np.abs(coeffs.beta[upper]))) * ctx.b_budget(race.entries) / n
    return alpha_term, beta_term, c2_term, c_max, b_max, coef_err + b_err, coef_err


def density_series(ctx: SpectralContext, coeffs: Optional[SimplexCoefficients], race: RaceTuple) -> DensityReport:
    """
    1/r! - N^{-1/2} sum alpha_j C_j + N^{-1} sum_{j<k} beta_jk B_jk
    + (2N)^{-1} (sum lambda_j C_j^2 + 2 sum_{j<k} beta_jk C_j C_k).

    Budget: c (1/N + C B / N^{3/2} + B^2 / N^2) plus propagated
    coefficient and B errors.
    """
    _check_context(ctx, race)
    coeffs = _coeffs_for(race, coeffs, ctx.config)
    alpha_term, beta_term, c2_term, c_max, b_max, propagated, coef_err = _series_parts(ctx, coeffs, race)
    n = ctx.n_q
    c = ctx.config.Calibration.DENSITY_BUDGET_C
    budget = c * (1.0 / n + c_max * b_max / n ** 1.5 + b_max ** 2 / n ** 2) + propagated
    terms = DensityTerms(1.0 / math.factorial(race.r), alpha_term, beta_term, c2_term)
    return _finish(ctx, race, "series", terms, budget, coefficient_errors=coef_err)


def density_first_order(ctx: SpectralContext, coeffs: Optional[SimplexCoefficients], race: RaceTuple) -> DensityReport:
    """The series without the quadratic C-terms; budget c (C^2/N + B^2/N^2)."""
    _check_context(ctx, race)
    coeffs = _coeffs_for(race, coeffs, ctx.config)
    alpha_term, beta_term, _, c_max, b_max, propagated, coef_err = _series_parts(ctx, coeffs, race)
    n = ctx.n_q
    c = ctx.config.Calibration.DENSITY_BUDGET_C
    budget = c * (c_max ** 2 / n + b_max ** 2 / n ** 2) + propagated
    terms = DensityTerms(1.0 / math.factorial(race.r), alpha_term, beta_term)
    return _finish(ctx, race, "first_order", terms, budget, coefficient_errors=coef_err)


def density_same_type(ctx: SpectralContext, coeffs: Optional[SimplexCoefficients], race: RaceTuple) -> DensityReport:
    """
    1/r! + N^{-1} sum_{j<k} beta_jk B_jk for all-square or all-non-square tuples.

    Raises:
        DomainError: the tuple mixes squares and non-squares
    """
    _check_context(ctx, race)
    if not race.same_type:
        raise DomainError(
            f"{list(race.entries)} mixes squares and non-squares mod {race.q}",
            suggestion="Use the series or first-order method for mixed tuples",
        )
    coeffs = _coeffs_for(race, coeffs, ctx.config)
    _, beta_term, _, c_max, b_max, propagated, coef_err = _series_parts(ctx, coeffs, race)
    n = ctx.n_q
    c = ctx.config.Calibration.DENSITY_BUDGET_C
    budget = c * (1.0 / n + c_max * b_max / n ** 1.5 + b_max ** 2 / n ** 2) + propagated
    terms = DensityTerms(1.0 / math.factorial(race.r), beta_term=beta_term)
    return _finish(ctx, race, "same_type", terms, budget, coefficient_errors=coef_err)


def density_three_way(ctx: SpectralContext, race: RaceTuple) -> DensityReport:
    """
    1/6 + (C_3 - C_1) / (4 sqrt(pi N)) + (B_12 + B_23 - 2 B_13) / (4 pi sqrt(3) N).
    """
    _check_context(ctx, race)
    if race.r != 3:
        raise DomainError(f"The three-way form needs r = 3, got r={race.r}")
    c1, _, c3 = race.c_values
    a1, a2, a3 = race.entries
    n = ctx.n_q
    b12, b23, b13 = ctx.b(a1, a2).value, ctx.b(a2, a3).value, ctx.b(a1, a3).value
    alpha_term = (c3 - c1) / (4.0 * math.sqrt(math.pi * n))
    beta_term = (b12 + b23 - 2.0 * b13) / (4.0 * math.pi * math.sqrt(3.0) * n)
    c_max = max(abs(c) for c in race.c_values)
    b_max = max(abs(b12), abs(b23), abs(b13))
    budget = ctx.config.Calibration.DENSITY_BUDGET_C * (c_max ** 2 / n + b_max ** 2 / n ** 2)
    budget += 4.0 * ctx.b_budget(race.entries) / (4.0 * math.pi * math.sqrt(3.0) * n)
    terms = DensityTerms(1.0 / 6.0, alpha_term, beta_term)
    return _finish(ctx, race, "three_way", terms, budget)


def density_two_way(ctx: SpectralContext, a1: int, a2: int) -> DensityReport:
    """
    1/2 - (C_q(a1) - C_q(a2)) / sqrt(2 pi V_q(a1, a2)), budget c C_q(1)^2 log^2 q / V.

    Raises:
        DomainError: a1 = a2 mod q or a non-unit
        DegenerateContextError: V_q(a1, a2) is not positive
    """
    race = RaceTuple.of(ctx.q, (a1, a2))
    c1, c2 = race.c_values
    v = v_q(ctx, *race.entries)
    if v <= 0:
        raise DegenerateContextError(f"V_q({a1}, {a2}) = {v:.6g} is not positive for q={ctx.q}")
    alpha_term = -(c1 - c2) / math.sqrt(2.0 * math.pi * v)
    c_one = chebyshev_c(1, ctx.q)
    budget = ctx.config.Calibration.TWO_WAY_BUDGET_C * c_one ** 2 * math.log(ctx.q) ** 2 / v
    return _finish(ctx, race, "two_way", DensityTerms(0.5, alpha_term), budget)


# =============================================================================
# Gaussian surrogate
# =============================================================================


def surrogate_moments(ctx: SpectralContext, race: RaceTuple) -> Tuple[np.ndarray, np.ndarray]:
    """Mean -C_q(a_j) and covariance N_q on the diagonal, B_q(a_j, a_k) off it."""
    mean = -np.array(race.c_values, dtype=np.float64)
    cov = ctx.b_matrix(race.entries)
    np.fill_diagonal(cov, ctx.n_q)
    return mean, cov


def _ordered_count(mean: np.ndarray, factor: np.ndarray, seed: int, shard: int, size: int) -> int:
    rng = np.random.Generator(np.random.Philox(seed).jumped(shard))
    x = mean + rng.standard_normal((size, len(mean))) @ factor.T
    return int(np.count_nonzero(np.all(np.diff(x, axis=1) < 0, axis=1)))


def surrogate_density_mc(
    ctx: SpectralContext,
    race: RaceTuple,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> DensityReport:
    """
    Monte Carlo estimate of P(X_1 > ... > X_r) for the Gaussian surrogate.

    A fixed seed gives bit-identical output. For r = 2 the exact value
    Phi((C_2 - C_1) / sqrt(V_q)) is reported as ``closed_form``.

    Raises:
        DegenerateContextError: the covariance is not positive definite
    """
    _check_context(ctx, race)
    config = ctx.config
    samples = int(samples if samples is not None else config.MC_SAMPLES)
    seed = int(seed if seed is not None else config.SEED)
    if samples < config.Internal.MIN_MC_SAMPLES:
        raise DomainError(f"samples={samples} is below {config.Internal.MIN_MC_SAMPLES}")
    mean, cov = surrogate_moments(ctx, race)
    try:
        factor = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as e:
        raise DegenerateContextError(
            f"Surrogate covariance for {list(race.entries)} mod {ctx.q} is not positive definite",
            suggestion="q is too small for this tuple; try a larger modulus",
        ) from e

    chunk = int(config.MC_CHUNK)
    sizes = [chunk] * (samples // chunk)
    if samples % chunk:
        sizes.append(samples % chunk)
    with ThreadPoolExecutor(max_workers=int(workers or config.WORKERS)) as executor:
        hits = sum(executor.map(lambda i: _ordered_count(mean, factor, seed, i, sizes[i]), range(len(sizes))))

    p = hits / samples
    std_error = math.sqrt(max(p * (1.0 - p), 1.0 / samples) / samples)
    closed = None
    if race.r == 2:
        c1, c2 = race.c_values
        closed = float(norm.cdf((c2 - c1) / math.sqrt(cov[0, 0] + cov[1, 1] - 2.0 * cov[0, 1])))
    baseline = 1.0 / math.factorial(race.r)
    terms = DensityTerms(baseline=baseline, alpha_term=p - baseline)
    return DensityReport(
        race=race,
        method="surrogate_mc",
        delta=p,
        terms=terms,
        error_budget=3.0 * std_error,
        seed=seed,
        samples=samples,
        std_error=std_error,
        closed_form=closed,
        calibration=config.calibration_snapshot(),
        notes=("non-Gaussian corrections of order 1/N_q are not modelled",),
    )


# =============================================================================
# Dispatch and orderings
# =============================================================================

METHOD_ALIASES = {
    "series": "series",
    "first-order": "first_order",
    "first_order": "first_order",
    "same-type": "same_type",
    "same_type": "same_type",
    "three-way": "three_way",
    "three_way": "three_way",
    "two-way": "two_way",
    "two_way": "two_way",
    "surrogate": "surrogate_mc",
    "surrogate_mc": "surrogate_mc",
}


def resolve_method(name: str) -> str:
    try:
        return METHOD_ALIASES[name.lower()]
    except KeyError:
        raise DomainError(
            f"Unknown density method: {name}",
            suggestion=f"Use one of: {', '.join(sorted(set(METHOD_ALIASES)))}",
        ) from None


def evaluate(
    ctx: SpectralContext,
    race: RaceTuple,
    method: str = "series",
    coeffs: Optional[SimplexCoefficients] = None,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> DensityReport:
    """Evaluate one ordering with the named method (aliases accepted)."""
    method = resolve_method(method)
    if method == "series":
        return density_series(ctx, coeffs, race)
    if method == "first_order":
        return density_first_order(ctx, coeffs, race)
    if method == "same_type":
        return density_same_type(ctx, coeffs, race)
    if method == "three_way":
        return density_three_way(ctx, race)
    if method == "two_way":
        if race.r != 2:
            raise DomainError(f"The two-way method needs r = 2, got r={race.r}")
        return density_two_way(ctx, *race.entries)
    return surrogate_density_mc(ctx, race, samples=samples, seed=seed)


def all_orderings(
    ctx: SpectralContext,
    race: RaceTuple,
    method: str = "series",
    coeffs: Optional[SimplexCoefficients] = None,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> Tuple[List[DensityReport], float]:
    """Reports for all r! orderings of the tuple and the sum of their densities."""
    reports = [
        evaluate(ctx, race.permuted(order), method, coeffs=coeffs, samples=samples, seed=seed)
        for order in itertools.permutations(range(race.r))
    ]
    return reports, float(sum(rep.delta for rep in reports))


@dataclass(frozen=True)
class MarginalCheck:
    residual: float
    tolerance: float
    orderings: int

    @property
    def within(self) -> bool:
        return self.residual <= self.tolerance


def marginalize_check(
    ctx: SpectralContext,
    coeffs: Optional[SimplexCoefficients],
    race: RaceTuple,
    sub_indices: Sequence[int],
    method: str = "series",
    samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> MarginalCheck:
    """
    Compare delta of the sub-triple with the sum of delta over the orderings
    of the full tuple that keep the sub-triple's relative order.

    Indices are 0-based positions in ``race``. For the surrogate the
    tolerance is 3 sigma of the difference; otherwise the summed budgets.
    """
    if race.r < 3 or len(sub_indices) != 3 or len(set(sub_indices)) != 3:
        raise DomainError("marginalize_check needs r >= 3 and three distinct sub-indices")
    if not all(0 <= i < race.r for i in sub_indices):
        raise DomainError(f"Sub-indices {list(sub_indices)} out of range for r={race.r}")
    method = resolve_method(method)
    sub = race.permuted(sub_indices)
    sub_report = evaluate(ctx, sub, method, samples=samples, seed=seed)

    rank = {idx: pos for pos, idx in enumerate(sub_indices)}
    reports = []
    for order in itertools.permutations(range(race.r)):
        positions = [rank[i] for i in order if i in rank]
        if positions == sorted(positions):
            reports.append(evaluate(ctx, race.permuted(order), method, coeffs=coeffs, samples=samples, seed=seed))

    total = sum(rep.delta for rep in reports)
    residual = abs(sub_report.delta - total)
    if method == "surrogate_mc":
        variance = sub_report.std_error ** 2 + sum(rep.std_error ** 2 for rep in reports)
        tolerance = 3.0 * math.sqrt(variance)
    else:
        tolerance = sub_report.error_budget + sum(rep.error_budget for rep in reports)
    return MarginalCheck(residual=residual, tolerance=tolerance, orderings=len(reports))


__all__ = [
    "RaceTuple",
    "DensityTerms",
    "DensityReport",
    "MarginalCheck",
    "METHOD_ALIASES",
    "resolve_method",
    "density_series",
    "density_first_order",
    "density_same_type",
    "density_three_way",
    "density_two_way",
    "surrogate_moments",
    "surrogate_density_mc",
    "evaluate",
    "all_orderings",
    "marginalize_check",
]
