"""
PRIMERACE Sieve

Prime generation with numpy: a simple sieve for base primes and oracles,
an odd-only segmented sieve streamed through a thread pool, and the
smoothed prime-power weight table used by character sums.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np

from primerace.config import Config
from primerace.decorators import memoize_once, timed
from primerace.errors import ConfigurationError, DomainError
from primerace.logging import run_logger

logger = logging.getLogger(__name__)


def simple_sieve(limit: int) -> np.ndarray:
    """All primes <= limit (int64)."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p::p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


@dataclass(frozen=True)
class PrimeSegment:
    """Primes in [low, high], optionally tagged with their residues mod q."""

    low: int
    high: int
    primes: np.ndarray
    residues: Optional[np.ndarray] = None


def _sieve_odd_segment(low: int, high: int, base: np.ndarray) -> np.ndarray:
    """Primes in [low, high] (inclusive) for odd low >= 3, base = odd primes <= sqrt(high)."""
    odd_count = (high - low) // 2 + 1
    mask = np.ones(odd_count, dtype=bool)
    for p in base:
        p = int(p)
        p2 = p * p
        if p2 > high:
            break
        start = max(p2, ((low + p - 1) // p) * p)
        if start % 2 == 0:
            start += p
        if start > high:
            continue
        mask[(start - low) // 2::p] = False
    return low + 2 * np.flatnonzero(mask).astype(np.int64)


def _segment_bounds(start: int, stop: int, segment_size: int) -> List[Tuple[int, int]]:
    """Odd-aligned inclusive [low, high] windows covering odd numbers of [start, stop]."""
    low = max(start, 3)
    if low % 2 == 0:
        low += 1
    bounds = []
    while low <= stop:
        high = min(low + segment_size - 1, stop)
        bounds.append((low, high))
        low = high + 1
        if low % 2 == 0:
            low += 1
    return bounds


def segmented_sieve(
    x: int,
    segment_size: Optional[int] = None,
    q: Optional[int] = None,
    start: int = 2,
    workers: Optional[int] = None,
    config=Config,
) -> Iterator[PrimeSegment]:
    """
    Stream the primes in [start, x] segment by segment, in increasing order.

    Segments are sieved by a thread pool and yielded in order. When ``q``
    is given each segment carries ``primes % q``.

    Raises:
        ConfigurationError: x above the desk-scale limit or segment too small
    """
    segment_size = int(segment_size or config.SEGMENT_SIZE)
    workers = int(workers or config.WORKERS)
    if x > config.Internal.MAX_RACE_X:
        raise ConfigurationError(
            f"X={x} exceeds the supported limit {config.Internal.MAX_RACE_X}",
            suggestion="Sieve in stages below 10^10",
        )
    if segment_size < config.Internal.MIN_SEGMENT_SIZE:
        raise ConfigurationError(
            f"segment_size={segment_size} is below {config.Internal.MIN_SEGMENT_SIZE}",
            suggestion="Use a segment size of at least 65536",
        )
    if x < max(start, 2):
        return

    base = simple_sieve(math.isqrt(x) + 1)
    odd_base = base[base > 2]

    def tag(primes: np.ndarray) -> Optional[np.ndarray]:
        return primes % q if q is not None else None

    if start <= 2:
        two = np.array([2], dtype=np.int64)
        yield PrimeSegment(low=2, high=2, primes=two, residues=tag(two))

    bounds = _segment_bounds(start, x, segment_size)
    wave = max(1, 2 * workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        for offset in range(0, len(bounds), wave):
            chunk = bounds[offset:offset + wave]
            # map() keeps submission order, giving the ordered merge
            results = executor.map(lambda b: _sieve_odd_segment(b[0], b[1], odd_base), chunk)
            for (low, high), primes in zip(chunk, results):
                yield PrimeSegment(low=low, high=high, primes=primes, residues=tag(primes))
            run_logger.sieve_progress(chunk[-1][1], x)


@timed("prime counting")
def prime_pi(x: int, segment_size: Optional[int] = None) -> int:
    """pi(x) by streaming the segmented sieve."""
    return sum(len(seg.primes) for seg in segmented_sieve(x, segment_size=segment_size))


def truncation_limit(y: float, factor: Optional[float] = None, config=Config) -> int:
    """Upper summation bound n <= factor * y * log(y)."""
    factor = config.TRUNCATION_FACTOR if factor is None else factor
    return int(factor * y * math.log(y))


@memoize_once(max_entries=2)
@timed("prime-power weight table")
def prime_power_weights(y: float, limit: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Smoothed weights over prime powers n = p^e <= limit.

    Returns (n, p, w) with w = log(p) / n * exp(-n / y), sorted by n.
    """
    if y <= 0:
        raise DomainError(f"Smoothing parameter must be positive, got {y}")
    ns: List[np.ndarray] = []
    ps: List[np.ndarray] = []
    for seg in segmented_sieve(limit):
        ns.append(seg.primes)
        ps.append(seg.primes)
    primes = np.concatenate(ns) if ns else np.array([], dtype=np.int64)

    # Higher powers p^e, e >= 2, only for p <= sqrt(limit)
    small = primes[primes <= math.isqrt(limit)]
    power = small * small
    base = small
    while len(power):
        ns.append(power)
        ps.append(base)
        keep = power <= limit // base
        power = power[keep] * base[keep]
        base = base[keep]
        keep = power <= limit
        power, base = power[keep], base[keep]

    n = np.concatenate(ns)
    p = np.concatenate(ps)
    order = np.argsort(n, kind="stable")
    n, p = n[order], p[order]
    w = np.log(p.astype(np.float64)) / n * np.exp(-n / float(y))
    logger.debug(f"Prime-power weights: {len(n)} terms up to {limit} (y={y:g})")
    return n, p, w


__all__ = [
    "PrimeSegment",
    "simple_sieve",
    "segmented_sieve",
    "prime_pi",
    "truncation_limit",
    "prime_power_weights",
]
