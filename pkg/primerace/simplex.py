"""
PRIMERACE Simplex Coefficients

Gaussian moments over the ordered region x_1 > x_2 > ... > x_r:

    alpha_j(r)    = (2 pi)^(-r/2) int x_j exp(-|x|^2/2)
    lambda_j(r)   = (2 pi)^(-r/2) int (x_j^2 - 1) exp(-|x|^2/2)
    beta_{j,k}(r) = (2 pi)^(-r/2) int x_j x_k exp(-|x|^2/2)

Each equals 1/r! times a moment of the order statistics of r standard
normals, which gives both the quadrature path (one- and two-dimensional
integrals against order-statistic densities) and the Monte Carlo path.
"""

from __future__ import annotations

import json
import logging
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ndtr

from primerace.config import Config
from primerace.decorators import memoize_once, timed
from primerace.errors import DomainError, NumericalError

logger = logging.getLogger(__name__)

# Integration window; the normal density is below 1e-21 outside it
_HALF_WIDTH = 10.0
_TRUNCATION = 1e-20
_START_NODES = 64
_MAX_NODES = 2048

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class SimplexCoefficients:
    """
    Coefficient table for one r. Index j (0-based) holds alpha_{j+1}(r);
    beta is upper triangular with beta[j, k] = beta_{j+1,k+1}(r) for j < k.
    """

    r: int
    alpha: np.ndarray
    lam: np.ndarray
    beta: np.ndarray
    alpha_err: np.ndarray
    lambda_err: np.ndarray
    beta_err: np.ndarray
    method: str
    precision: float

    def to_dict(self) -> Dict:
        pairs = [(j, k) for j in range(self.r) for k in range(j + 1, self.r)]
        return {
            "r": self.r,
            "method": self.method,
            "precision": self.precision,
            "alpha": [{"j": j + 1, "value": float(self.alpha[j]), "error": float(self.alpha_err[j])} for j in range(self.r)],
            "lambda": [{"j": j + 1, "value": float(self.lam[j]), "error": float(self.lambda_err[j])} for j in range(self.r)],
            "beta": [
                {"j": j + 1, "k": k + 1, "value": float(self.beta[j, k]), "error": float(self.beta_err[j, k])}
                for j, k in pairs
            ],
        }

    @property
    def max_error(self) -> float:
        return float(max(self.alpha_err.max(), self.lambda_err.max(), self.beta_err.max(initial=0.0)))


# =============================================================================
# Closed forms
# =============================================================================


def _closed_alpha_beta(r: int) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    if r == 2:
        a1 = 1.0 / (2.0 * math.sqrt(math.pi))
        return np.array([a1, -a1]), np.zeros((2, 2))
    if r == 3:
        a1 = 1.0 / (4.0 * math.sqrt(math.pi))
        b12 = 1.0 / (4.0 * math.pi * math.sqrt(3.0))
        beta = np.zeros((3, 3))
        beta[0, 1] = beta[1, 2] = b12
        beta[0, 2] = -2.0 * b12
        return np.array([a1, 0.0, -a1]), beta
    return None


# =============================================================================
# Quadrature
# =============================================================================


def _pdf(x: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * x * x) / _SQRT_2PI


def _single(r: int, j: int, moment: Callable[[np.ndarray], np.ndarray], nodes: int) -> float:
    """1/((j-1)!(r-j)!) int moment(x) pdf(x) (1-Phi)^(j-1) Phi^(r-j) dx, 1-based j."""
    t, w = leggauss(nodes)
    x = _HALF_WIDTH * t
    cdf = ndtr(x)
    integrand = moment(x) * _pdf(x) * (1.0 - cdf) ** (j - 1) * cdf ** (r - j)
    const = 1.0 / (math.factorial(j - 1) * math.factorial(r - j))
    return const * _HALF_WIDTH * float(np.dot(w, integrand))


def _double(r: int, j: int, k: int, nodes: int) -> float:
    """beta_{j,k}(r) as an integral over u > v against the joint order-statistic density."""
    t, w = leggauss(nodes)
    u = _HALF_WIDTH * t
    wu = _HALF_WIDTH * w
    # inner variable on [-L, u], one Gauss-Legendre rule per outer node
    half = 0.5 * (u + _HALF_WIDTH)
    v = half[:, None] * t[None, :] + (half - _HALF_WIDTH)[:, None]
    wv = half[:, None] * w[None, :]
    cu, cv = ndtr(u)[:, None], ndtr(v)
    integrand = (
        u[:, None] * _pdf(u)[:, None] * (1.0 - cu) ** (j - 1)
        * v * _pdf(v) * (cu - cv) ** (k - j - 1) * cv ** (r - k)
    )
    const = 1.0 / (math.factorial(j - 1) * math.factorial(k - j - 1) * math.factorial(r - k))
    return const * float(np.sum(wu[:, None] * wv * integrand))


def _refine(evaluate: Callable[[int], float], precision: float, label: str) -> Tuple[float, float]:
    """Double the node count until successive rules agree to ``precision``."""
    nodes = _START_NODES
    previous = evaluate(nodes)
    while nodes < _MAX_NODES:
        nodes *= 2
        current = evaluate(nodes)
        error = abs(current - previous) + _TRUNCATION
        if error <= precision:
            return current, error
        previous = current
    raise NumericalError(
        f"Quadrature for {label} did not reach {precision:g} with {nodes} nodes",
        suggestion="Loosen SIMPLEX_PRECISION or use the Monte Carlo estimate",
    )


def _check_r(r: int, config=Config) -> int:
    if int(r) != r or not config.Internal.MIN_SIMPLEX_R <= r <= config.Internal.MAX_SIMPLEX_R:
        raise DomainError(
            f"r={r} is outside the supported range",
            suggestion=f"Use {config.Internal.MIN_SIMPLEX_R} <= r <= {config.Internal.MAX_SIMPLEX_R}",
        )
    return int(r)


@memoize_once(max_entries=32)
@timed("simplex coefficient table")
def _table(r: int, precision: float) -> SimplexCoefficients:
    alpha = np.zeros(r)
    lam = np.zeros(r)
    beta = np.zeros((r, r))
    alpha_err = np.zeros(r)
    lambda_err = np.zeros(r)
    beta_err = np.zeros((r, r))

    for j in range(1, r + 1):
        lam[j - 1], lambda_err[j - 1] = _refine(
            lambda n, j=j: _single(r, j, lambda x: x * x - 1.0, n), precision, f"lambda_{j}({r})"
        )

    closed = _closed_alpha_beta(r)
    if closed is not None:
        alpha, beta = closed
        method = "closed-form"
    else:
        method = "quadrature"
        for j in range(1, r + 1):
            alpha[j - 1], alpha_err[j - 1] = _refine(
                lambda n, j=j: _single(r, j, lambda x: x, n), precision, f"alpha_{j}({r})"
            )
        for j in range(1, r + 1):
            for k in range(j + 1, r + 1):
                beta[j - 1, k - 1], beta_err[j - 1, k - 1] = _refine(
                    lambda n, j=j, k=k: _double(r, j, k, n), precision, f"beta_{j},{k}({r})"
                )
    logger.debug(f"Simplex coefficients for r={r} via {method}")
    return SimplexCoefficients(
        r=r, alpha=alpha, lam=lam, beta=beta,
        alpha_err=alpha_err, lambda_err=lambda_err, beta_err=beta_err,
        method=method, precision=precision,
    )


def coefficient_table(r: int, precision: Optional[float] = None, config=Config) -> SimplexCoefficients:
    """
    alpha, lambda and beta for r competitors.

    r = 2 and r = 3 use exact alpha and beta; lambda and every entry for
    r >= 4 come from adaptive Gauss-Legendre quadrature with a per-entry
    error no larger than ``precision``.

    Raises:
        DomainError: r outside [2, 8]
        NumericalError: quadrature did not converge
    """
    r = _check_r(r, config)
    precision = float(precision if precision is not None else config.SIMPLEX_PRECISION)
    return _table(r, precision)


# =============================================================================
# Identities
# =============================================================================


@dataclass(frozen=True)
class IdentityResiduals:
    """Zero-sum and reversal residuals of a table, with the tolerance they are held to."""

    r: int
    alpha_sum: float
    lambda_sum: float
    beta_sum: float
    alpha_reversal: float
    beta_reversal: float
    tolerance: float

    @property
    def holds(self) -> bool:
        return max(
            abs(self.alpha_sum), abs(self.lambda_sum), abs(self.beta_sum),
            self.alpha_reversal, self.beta_reversal,
        ) <= self.tolerance


def check_identities(coeffs: SimplexCoefficients) -> IdentityResiduals:
    r = coeffs.r
    upper = np.triu_indices(r, k=1)
    rev = np.arange(r)[::-1]
    beta_rev = max(
        (abs(coeffs.beta[j, k] - coeffs.beta[rev[k], rev[j]]) for j, k in zip(*upper)),
        default=0.0,
    )
    errors = coeffs.alpha_err.sum() + coeffs.lambda_err.sum() + coeffs.beta_err[upper].sum()
    return IdentityResiduals(
        r=r,
        alpha_sum=float(coeffs.alpha.sum()),
        lambda_sum=float(coeffs.lam.sum()),
        beta_sum=float(coeffs.beta[upper].sum()),
        alpha_reversal=float(np.abs(coeffs.alpha + coeffs.alpha[::-1]).max()),
        beta_reversal=float(beta_rev),
        tolerance=float(errors) + 1e-12,
    )


def export_tables(tables: Iterable[SimplexCoefficients], path: Path) -> Path:
    """Write coefficient tables as JSON keyed by r."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {str(t.r): t.to_dict() for t in tables}
    path.write_text(json.dumps(payload, indent=2))
    return path


# =============================================================================
# Monte Carlo
# =============================================================================


@dataclass(frozen=True)
class MonteCarloEstimate:
    r: int
    which: str
    estimate: float
    std_error: float
    samples: int
    seed: int
    extra: Dict = field(default_factory=dict)


_WHICH = re.compile(r"^(alpha|lambda)_(\d+|sum)$|^beta_(\d+)_(\d+)$|^beta_sum$")


def _statistic(r: int, which: str) -> Callable[[np.ndarray], np.ndarray]:
    """Per-sample statistic on order statistics Y (descending, shape (m, r))."""
    match = _WHICH.match(which)
    if match is None:
        raise DomainError(
            f"Unknown coefficient selector: {which}",
            suggestion="Use alpha_<j>, lambda_<j>, beta_<j>_<k>, alpha_sum, lambda_sum or beta_sum",
        )
    if which == "beta_sum":
        return lambda y: 0.5 * (y.sum(axis=1) ** 2 - (y * y).sum(axis=1))
    if match.group(3) is not None:
        j, k = int(match.group(3)), int(match.group(4))
        if not 1 <= j < k <= r:
            raise DomainError(f"beta_{j}_{k} needs 1 <= j < k <= {r}")
        return lambda y: y[:, j - 1] * y[:, k - 1]
    kind, index = match.group(1), match.group(2)
    if index == "sum":
        if kind == "alpha":
            return lambda y: y.sum(axis=1)
        return lambda y: (y * y - 1.0).sum(axis=1)
    j = int(index)
    if not 1 <= j <= r:
        raise DomainError(f"{kind}_{j} needs 1 <= j <= {r}")
    if kind == "alpha":
        return lambda y: y[:, j - 1]
    return lambda y: y[:, j - 1] ** 2 - 1.0


def _shard_moments(r: int, stat: Callable, seed: int, shard: int, size: int) -> Tuple[int, float, float]:
    """(count, mean, M2) of one shard; shard i draws from the generator jumped i times."""
    rng = np.random.Generator(np.random.Philox(seed).jumped(shard))
    y = -np.sort(-rng.standard_normal((size, r)), axis=1)
    values = stat(y)
    mean = float(values.mean())
    return size, mean, float(((values - mean) ** 2).sum())


def _merge(a: Tuple[int, float, float], b: Tuple[int, float, float]) -> Tuple[int, float, float]:
    """Chan et al. pairwise combination of (count, mean, M2)."""
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    delta = mb - ma
    return n, ma + delta * nb / n, sa + sb + delta * delta * na * nb / n


def mc_estimate(
    r: int,
    which: str,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
    config=Config,
) -> MonteCarloEstimate:
    """
    Unbiased Monte Carlo estimate of one coefficient (or a coefficient sum).

    Draw r standard normals, sort them descending and average the
    statistic; dividing by r! gives the ordered-region integral. Shards use
    disjoint Philox streams and are merged in shard order, so a seed fixes
    the result bit for bit regardless of ``workers``.

    Raises:
        DomainError: samples below 10^4, r out of range or a bad selector
    """
    r = _check_r(r, config)
    samples = int(samples if samples is not None else config.MC_SAMPLES)
    seed = int(seed if seed is not None else config.SEED)
    if samples < config.Internal.MIN_MC_SAMPLES:
        raise DomainError(
            f"samples={samples} is below {config.Internal.MIN_MC_SAMPLES}",
            suggestion="Monte Carlo estimates need at least 10^4 samples",
        )
    stat = _statistic(r, which)
    chunk = int(config.MC_CHUNK)
    sizes = [chunk] * (samples // chunk)
    if samples % chunk:
        sizes.append(samples % chunk)

    with ThreadPoolExecutor(max_workers=int(workers or config.WORKERS)) as executor:
        parts = list(executor.map(lambda i: _shard_moments(r, stat, seed, i, sizes[i]), range(len(sizes))))

    total = parts[0]
    for part in parts[1:]:
        total = _merge(total, part)
    n, mean, m2 = total
    scale = 1.0 / math.factorial(r)
    std_error = math.sqrt(m2 / (n - 1) / n) * scale
    return MonteCarloEstimate(r=r, which=which, estimate=mean * scale, std_error=std_error, samples=n, seed=seed)


__all__ = [
    "SimplexCoefficients",
    "IdentityResiduals",
    "MonteCarloEstimate",
    "coefficient_table",
    "check_identities",
    "export_tables",
    "mc_estimate",
]
