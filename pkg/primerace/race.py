"""
PRIMERACE Race

Exact prime counts pi(x; q, a_j) for a set of classes, recorded at
geometric checkpoints and at every point where the ordering of the counts
changes, plus the logarithmic measure of each ordering over [2, X].

Orderings are tuples of class positions, largest count first: (1, 0)
means pi(x; q, a_2) > pi(x; q, a_1). Equal counts (any tie) form their own
bucket.

Trace file layout (little-endian):
    header   magic "PRTR", format version (u16), q (u64), r (u16), X (u64),
             checkpoints per decade (u16), x_done (u64), pi(x_done) (u64),
             checkpoint count (u64), event count (u64)
    classes  r x u64
    running  r x u64 counts at x_done
    columns  delta-encoded i8: checkpoint x, checkpoint counts (row-major),
             checkpoint pi, event x, event counts (row-major)
"""

from __future__ import annotations

import csv
import itertools
import logging
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import primefactors

from primerace.arith import check_modulus, phi, require_unit
from primerace.cache import atomic_write_bytes
from primerace.config import Config
from primerace.errors import CacheFormatError, ConfigurationError, DomainError, PreconditionError
from primerace.logging import run_logger
from primerace.sieve import segmented_sieve

logger = logging.getLogger(__name__)

TRACE_HEADER = struct.Struct("<4sHQHQHQQQQ")
TIE = -1

FINITE_X_NOTE = "finite-X measure; convergence to the limiting density is not quantified"


def geometric_checkpoints(x_max: int, per_decade: int) -> np.ndarray:
    """floor(10^(k/per_decade)) in [2, X], always ending at X."""
    if per_decade < 1:
        raise ConfigurationError(f"checkpoints per decade must be positive, got {per_decade}")
    k_lo = math.ceil(per_decade * math.log10(2))
    k_hi = math.floor(per_decade * math.log10(x_max))
    points = [int(10 ** (k / per_decade)) for k in range(k_lo, k_hi + 1)]
    points.append(int(x_max))
    xs = np.unique(np.array(points, dtype=np.int64))
    return xs[(xs >= 2) & (xs <= x_max)]


def _state_codes(counts: np.ndarray) -> np.ndarray:
    """Encode each row's ordering (largest first) as a base-r integer; ties become TIE."""
    r = counts.shape[1]
    order = np.argsort(-counts, axis=1, kind="stable")
    ranked = np.take_along_axis(counts, order, axis=1)
    tied = np.any(np.diff(ranked, axis=1) == 0, axis=1)
    weights = r ** np.arange(r - 1, -1, -1, dtype=np.int64)
    codes = order.astype(np.int64) @ weights
    codes[tied] = TIE
    return codes


def _encode_ordering(ordering: Sequence[int], r: int) -> int:
    ordering = tuple(int(i) for i in ordering)
    if sorted(ordering) != list(range(r)):
        raise DomainError(f"Ordering {ordering} is not a permutation of 0..{r - 1}")
    return sum(pos * r ** (r - 1 - k) for k, pos in enumerate(ordering))


@dataclass
class RaceTrace:
    """Counts of primes in each class, exact at checkpoints and at ordering changes."""

    q: int
    classes: Tuple[int, ...]
    x_max: int
    checkpoints_per_decade: int
    checkpoints: np.ndarray
    counts: np.ndarray
    pi: np.ndarray
    event_x: np.ndarray
    event_counts: np.ndarray
    x_done: int
    pi_done: int
    running: np.ndarray
    notes: List[str] = field(default_factory=list)

    @property
    def r(self) -> int:
        return len(self.classes)

    @property
    def complete(self) -> bool:
        return self.x_done >= self.x_max

    def states(self) -> np.ndarray:
        """Ordering code in force on [event_x[i], event_x[i+1])."""
        return _state_codes(self.event_counts)

    def partition_residual(self) -> Optional[int]:
        """
        max |sum_j pi(x; q, a_j) + #{p <= x : p | q} - pi(x)| over checkpoints,
        or None when the classes do not exhaust the units mod q.
        """
        if self.r != phi(self.q):
            return None
        divisors = primefactors(self.q)
        ramified = np.array([sum(1 for p in divisors if p <= x) for x in self.checkpoints], dtype=np.int64)
        return int(np.max(np.abs(self.counts.sum(axis=1) + ramified - self.pi))) if len(self.checkpoints) else 0

    def rows(self) -> Tuple[np.ndarray, np.ndarray]:
        """Checkpoint and event rows merged by x (duplicates dropped)."""
        xs = np.concatenate([self.checkpoints, self.event_x])
        cs = np.concatenate([self.counts, self.event_counts])
        xs, first = np.unique(xs, return_index=True)
        return xs, cs[first]

    def to_csv(self, path: Path) -> Path:
        """Write ``x,count_a1,...,count_ar``."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        xs, cs = self.rows()
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["x"] + [f"count_{a}" for a in self.classes])
            for x, row in zip(xs, cs):
                writer.writerow([int(x)] + [int(c) for c in row])
        return path


# =============================================================================
# Trace files
# =============================================================================


def _delta(values: np.ndarray) -> bytes:
    values = np.asarray(values, dtype=np.int64)
    if values.ndim == 1:
        return np.diff(values, prepend=0).astype("<i8").tobytes()
    return np.diff(values, axis=0, prepend=np.zeros((1, values.shape[1]), dtype=np.int64)).astype("<i8").tobytes()


def _undelta(blob: bytes, offset: int, rows: int, width: int = 1) -> Tuple[np.ndarray, int]:
    size = rows * width * 8
    if offset + size > len(blob):
        raise CacheFormatError("truncated trace columns")
    raw = np.frombuffer(blob, dtype="<i8", count=rows * width, offset=offset).astype(np.int64)
    if width == 1:
        return np.cumsum(raw), offset + size
    return np.cumsum(raw.reshape(rows, width), axis=0), offset + size


def write_trace(trace: RaceTrace, path: Path, config=Config) -> Path:
    path = Path(path)
    header = TRACE_HEADER.pack(
        config.Internal.TRACE_MAGIC,
        config.Internal.TRACE_FORMAT_VERSION,
        trace.q,
        trace.r,
        trace.x_max,
        trace.checkpoints_per_decade,
        trace.x_done,
        trace.pi_done,
        len(trace.checkpoints),
        len(trace.event_x),
    )
    body = b"".join([
        np.asarray(trace.classes, dtype="<u8").tobytes(),
        np.asarray(trace.running, dtype="<u8").tobytes(),
        _delta(trace.checkpoints),
        _delta(trace.counts.reshape(-1, trace.r)),
        _delta(trace.pi),
        _delta(trace.event_x),
        _delta(trace.event_counts.reshape(-1, trace.r)),
    ])
    atomic_write_bytes(path, header + body)
    run_logger.trace_checkpoint(str(path), trace.x_done, q=trace.q, x_max=trace.x_max)
    return path


def read_trace(path: Path, config=Config) -> RaceTrace:
    """
    Load a trace file.

    Raises:
        CacheFormatError: bad magic, version or truncated data
    """
    blob = Path(path).read_bytes()
    if len(blob) < TRACE_HEADER.size:
        raise CacheFormatError("truncated trace header")
    magic, fmt, q, r, x_max, per_decade, x_done, pi_done, n_chk, n_ev = TRACE_HEADER.unpack_from(blob)
    if magic != config.Internal.TRACE_MAGIC:
        raise CacheFormatError("bad trace magic")
    if fmt != config.Internal.TRACE_FORMAT_VERSION:
        raise CacheFormatError(f"trace format version {fmt}")
    offset = TRACE_HEADER.size
    if offset + 16 * r > len(blob):
        raise CacheFormatError("truncated trace classes")
    classes = tuple(int(c) for c in np.frombuffer(blob, dtype="<u8", count=r, offset=offset))
    offset += 8 * r
    running = np.frombuffer(blob, dtype="<u8", count=r, offset=offset).astype(np.int64)
    offset += 8 * r
    checkpoints, offset = _undelta(blob, offset, n_chk)
    counts, offset = _undelta(blob, offset, n_chk, r)
    pi, offset = _undelta(blob, offset, n_chk)
    event_x, offset = _undelta(blob, offset, n_ev)
    event_counts, offset = _undelta(blob, offset, n_ev, r)
    if offset != len(blob):
        raise CacheFormatError(f"trailing bytes in trace ({len(blob) - offset})")
    return RaceTrace(
        q=q, classes=classes, x_max=x_max, checkpoints_per_decade=per_decade,
        checkpoints=checkpoints.astype(np.int64), counts=counts.reshape(n_chk, r).astype(np.int64),
        pi=pi.astype(np.int64), event_x=event_x.astype(np.int64),
        event_counts=event_counts.reshape(n_ev, r).astype(np.int64),
        x_done=x_done, pi_done=pi_done, running=running,
    )


# =============================================================================
# Counting
# =============================================================================


class _RaceAccumulator:
    """Single writer folding ordered prime segments into a trace."""

    def __init__(self, trace: RaceTrace, schedule: np.ndarray, lookup: np.ndarray):
        self.trace = trace
        self.schedule = schedule
        self.lookup = lookup
        self.next_checkpoint = int(np.searchsorted(schedule, trace.x_done, side="right"))
        self.running = trace.running.astype(np.int64).copy()
        self.pi_done = trace.pi_done
        self.state = int(_state_codes(self.running[None, :])[0])
        self.chk_x: List[np.ndarray] = [trace.checkpoints]
        self.chk_counts: List[np.ndarray] = [trace.counts]
        self.chk_pi: List[np.ndarray] = [trace.pi]
        self.ev_x: List[np.ndarray] = [trace.event_x]
        self.ev_counts: List[np.ndarray] = [trace.event_counts]

    def add(self, primes: np.ndarray, residues: np.ndarray, high: int) -> None:
        r = self.trace.r
        idx = self.lookup[residues]
        mask = idx >= 0
        cp, ci = primes[mask], idx[mask]
        onehot = np.zeros((len(cp), r), dtype=np.int64)
        onehot[np.arange(len(cp)), ci] = 1
        cum = np.cumsum(onehot, axis=0) + self.running

        # Checkpoints falling in (x_done, high]
        stop = int(np.searchsorted(self.schedule, high, side="right"))
        if stop > self.next_checkpoint:
            xs = self.schedule[self.next_checkpoint:stop]
            k = np.searchsorted(cp, xs, side="right")
            rows = np.tile(self.running, (len(xs), 1))
            if len(cp):
                rows = np.where((k > 0)[:, None], cum[np.maximum(k - 1, 0)], rows)
            self.chk_x.append(xs)
            self.chk_counts.append(rows)
            self.chk_pi.append(self.pi_done + np.searchsorted(primes, xs, side="right"))
            self.next_checkpoint = stop

        if len(cp):
            codes = _state_codes(cum)
            changed = codes != np.concatenate([[self.state], codes[:-1]])
            self.ev_x.append(cp[changed])
            self.ev_counts.append(cum[changed])
            self.state = int(codes[-1])
            self.running = cum[-1].copy()
        self.pi_done += len(primes)
        self.trace.x_done = high

    def snapshot(self) -> RaceTrace:
        t = self.trace
        r = t.r
        t.checkpoints = np.concatenate(self.chk_x).astype(np.int64)
        t.counts = np.concatenate([c.reshape(-1, r) for c in self.chk_counts]).astype(np.int64)
        t.pi = np.concatenate(self.chk_pi).astype(np.int64)
        t.event_x = np.concatenate(self.ev_x).astype(np.int64)
        t.event_counts = np.concatenate([c.reshape(-1, r) for c in self.ev_counts]).astype(np.int64)
        t.running = self.running.copy()
        t.pi_done = self.pi_done
        self.chk_x, self.chk_counts, self.chk_pi = [t.checkpoints], [t.counts], [t.pi]
        self.ev_x, self.ev_counts = [t.event_x], [t.event_counts]
        return t


def _check_classes(q: int, classes: Sequence[int], config) -> Tuple[int, ...]:
    q = check_modulus(q)
    classes = tuple(require_unit(int(a), q) for a in classes)
    if len(classes) < 2:
        raise DomainError(f"A race needs at least two classes, got {len(classes)}")
    if len(set(classes)) != len(classes):
        raise DomainError(f"Classes {classes} are not distinct mod {q}")
    if len(classes) > config.Internal.MAX_SIMPLEX_R:
        raise DomainError(f"At most {config.Internal.MAX_SIMPLEX_R} classes are supported")
    return classes


def race_counts(
    q: int,
    classes: Sequence[int],
    x_max: int,
    checkpoints_per_decade: Optional[int] = None,
    trace_path: Optional[Path] = None,
    segment_size: Optional[int] = None,
    workers: Optional[int] = None,
    config=Config,
) -> RaceTrace:
    """
    Sieve to X and record the race among ``classes`` mod q.

    With ``trace_path`` the trace is saved after every wave of segments and
    a compatible existing file is resumed from its last position.

    Raises:
        DomainError: invalid classes or X < 3
        ConfigurationError: X above the desk-scale limit
    """
    classes = _check_classes(q, classes, config)
    q = int(q)
    x_max = int(x_max)
    if x_max < 3:
        raise DomainError(f"X must be at least 3, got {x_max}")
    if x_max > config.Internal.MAX_RACE_X:
        raise ConfigurationError(
            f"X={x_max} exceeds the supported limit {config.Internal.MAX_RACE_X}",
            suggestion="Run races below 10^10",
        )
    per_decade = int(checkpoints_per_decade or config.CHECKPOINTS_PER_DECADE)
    schedule = geometric_checkpoints(x_max, per_decade)
    r = len(classes)

    lookup = np.full(q, -1, dtype=np.int64)
    lookup[list(classes)] = np.arange(r)

    trace = _resume(trace_path, q, classes, x_max, per_decade, config)
    if trace is None:
        trace = _origin(q, classes, x_max, per_decade, schedule, lookup)
    if trace.complete:
        logger.info(f"Trace for q={q} {classes} already complete to X={x_max}")
        return trace

    acc = _RaceAccumulator(trace, schedule, lookup)
    wave = 2 * int(workers or config.WORKERS)
    processed = 0
    for segment in segmented_sieve(x_max, segment_size=segment_size, q=q, start=trace.x_done + 1,
                                   workers=workers, config=config):
        acc.add(segment.primes, segment.residues, segment.high)
        processed += 1
        if trace_path is not None and processed % wave == 0:
            write_trace(acc.snapshot(), trace_path, config)
    # checkpoints past the last odd segment
    acc.add(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), x_max)
    trace = acc.snapshot()
    trace.notes.append(FINITE_X_NOTE)
    if trace_path is not None:
        write_trace(trace, trace_path, config)
    logger.debug(f"Race q={q} {classes} to X={x_max}: {len(trace.event_x)} ordering changes")
    return trace


def _origin(q: int, classes, x_max: int, per_decade: int, schedule: np.ndarray, lookup: np.ndarray) -> RaceTrace:
    """The trace at x = 2."""
    r = len(classes)
    running = np.zeros(r, dtype=np.int64)
    if lookup[2 % q] >= 0:
        running[lookup[2 % q]] = 1
    at_two = schedule[schedule <= 2]
    return RaceTrace(
        q=q, classes=tuple(classes), x_max=x_max, checkpoints_per_decade=per_decade,
        checkpoints=at_two.astype(np.int64),
        counts=np.tile(running, (len(at_two), 1)),
        pi=np.ones(len(at_two), dtype=np.int64),
        event_x=np.array([2], dtype=np.int64),
        event_counts=running[None, :].copy(),
        x_done=2, pi_done=1, running=running,
    )


def _resume(path: Optional[Path], q: int, classes, x_max: int, per_decade: int, config) -> Optional[RaceTrace]:
    if path is None or not Path(path).exists():
        return None
    try:
        trace = read_trace(path, config)
    except (CacheFormatError, OSError) as e:
        run_logger.cache_rejected(str(path), str(e), q=q)
        return None
    if (trace.q, trace.classes, trace.x_max, trace.checkpoints_per_decade) != (q, tuple(classes), x_max, per_decade):
        run_logger.cache_rejected(str(path), "trace parameters differ", q=q)
        return None
    run_logger.cache_hit(str(path), q=q, x_done=trace.x_done)
    return trace


# =============================================================================
# Logarithmic measures
# =============================================================================


@dataclass(frozen=True)
class EmpiricalDensity:
    ordering: Tuple[int, ...]
    strict_measure: float
    tie_measure: float
    x_max: int
    lead_changes: int
    notes: Tuple[str, ...] = (FINITE_X_NOTE,)


@dataclass(frozen=True)
class OrderingMeasures:
    q: int
    classes: Tuple[int, ...]
    x_max: int
    measures: Dict[Tuple[int, ...], float]
    ties: float
    lead_changes: Dict[Tuple[int, ...], int]

    @property
    def total(self) -> float:
        return float(sum(self.measures.values()) + self.ties)

    def to_dict(self) -> Dict:
        return {
            "q": self.q,
            "classes": list(self.classes),
            "x_max": self.x_max,
            "orderings": [
                {
                    "ordering": [self.classes[i] for i in order],
                    "measure": measure,
                    "lead_changes": self.lead_changes[order],
                }
                for order, measure in self.measures.items()
            ],
            "ties": self.ties,
            "total": self.total,
            "notes": [FINITE_X_NOTE],
        }


def _durations(trace: RaceTrace) -> Tuple[np.ndarray, np.ndarray]:
    """(state per interval, log-length per interval) normalised by log(X/2)."""
    if not trace.complete:
        raise PreconditionError(
            f"Trace stops at {trace.x_done} < X={trace.x_max}",
            suggestion="Run race_counts to completion first",
        )
    t = np.append(trace.event_x, trace.x_max).astype(np.float64)
    lengths = np.log1p(np.diff(t) / t[:-1])
    return trace.states(), lengths / math.log(trace.x_max / 2.0)


def _entries(states: np.ndarray, code: int) -> int:
    hits = states == code
    return int(np.count_nonzero(hits[1:] & ~hits[:-1]))


def empirical_log_density(trace: RaceTrace, ordering: Sequence[int]) -> EmpiricalDensity:
    """Logarithmic measure of [2, X] on which ``ordering`` holds strictly."""
    code = _encode_ordering(ordering, trace.r)
    states, weights = _durations(trace)
    return EmpiricalDensity(
        ordering=tuple(int(i) for i in ordering),
        strict_measure=float(weights[states == code].sum()),
        tie_measure=float(weights[states == TIE].sum()),
        x_max=trace.x_max,
        lead_changes=_entries(states, code),
    )


def lead_changes(trace: RaceTrace, ordering: Sequence[int]) -> int:
    """Number of times ``ordering`` starts to hold after x = 2."""
    return _entries(trace.states(), _encode_ordering(ordering, trace.r))


def ordering_measures(trace: RaceTrace) -> OrderingMeasures:
    """Strict measure of every ordering plus the tie bucket."""
    states, weights = _durations(trace)
    measures: Dict[Tuple[int, ...], float] = {}
    changes: Dict[Tuple[int, ...], int] = {}
    for order in itertools.permutations(range(trace.r)):
        code = _encode_ordering(order, trace.r)
        measures[order] = float(weights[states == code].sum())
        changes[order] = _entries(states, code)
    return OrderingMeasures(
        q=trace.q,
        classes=trace.classes,
        x_max=trace.x_max,
        measures=measures,
        ties=float(weights[states == TIE].sum()),
        lead_changes=changes,
    )


__all__ = [
    "TIE",
    "RaceTrace",
    "EmpiricalDensity",
    "OrderingMeasures",
    "geometric_checkpoints",
    "race_counts",
    "write_trace",
    "read_trace",
    "empirical_log_density",
    "ordering_measures",
    "lead_changes",
]
