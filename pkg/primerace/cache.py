"""
PRIMERACE Cache

On-disk store for smoothed character sums, keyed by (q, y, truncation).

File layout (little-endian):
    header  magic "PRCS", format version (u16), q, y, truncation limit,
            record count (u64 each), principal smoothed sum (f8),
            writer package version (16 bytes, NUL padded)
    records index (u4), re (f8), im (f8)

Error budgets depend on the calibration of the reading run and are not stored.

Writes are atomic (temp file + replace) with owner-only permissions.
"""

from __future__ import annotations

import logging
import os
import stat
import struct
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from primerace.config import Config
from primerace.errors import CacheFormatError
from primerace.logging import run_logger
from primerace.utils.version_gating import is_compatible_writer

logger = logging.getLogger(__name__)

HEADER = struct.Struct("<4sHQQQQd16s")
RECORD_DTYPE = np.dtype([("index", "<u4"), ("re", "<f8"), ("im", "<f8")])

_write_lock = threading.Lock()


def atomic_write_bytes(path: Path, payload: bytes) -> None:
    """Write ``payload`` to ``path`` atomically with secure permissions."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with _write_lock:
        temp_file = path.with_suffix(path.suffix + ".tmp")
        try:
            with open(temp_file, "wb") as f:
                f.write(payload)
            # Set secure permissions (0600 - read/write for owner only)
            try:
                os.chmod(temp_file, stat.S_IRUSR | stat.S_IWUSR)
            except OSError:
                pass
            # Atomic move
            temp_file.replace(path)
        except Exception:
            if temp_file.exists():
                temp_file.unlink()
            raise


@dataclass(frozen=True)
class CachedSums:
    """Character sums for every index 0..phi(q)-1 plus the principal sum."""

    q: int
    y: int
    limit: int
    values: np.ndarray  # complex128, indexed by character index
    principal: float
    budgets: Optional[np.ndarray] = None  # float64, filled in per run


class SmoothedSumCache:
    """Binary cache of smoothed L'/L sums."""

    def __init__(self, directory: Optional[Path] = None, config=Config):
        self.directory = Path(directory) if directory is not None else config.cache_path()
        self.config = config

    def path_for(self, q: int, y: int, limit: int) -> Path:
        return self.directory / f"chisums_q{q}_y{int(y)}_n{limit}.bin"

    def load(self, q: int, y: int, limit: int) -> Optional[CachedSums]:
        """Return cached sums, or None on a miss or an unusable file."""
        path = self.path_for(q, y, limit)
        if not path.exists():
            run_logger.cache_miss(str(path), q=q)
            return None
        try:
            sums = self._decode(path.read_bytes(), q, int(y), limit)
        except CacheFormatError as e:
            run_logger.cache_rejected(str(path), e.message, q=q)
            return None
        except OSError as e:
            run_logger.cache_rejected(str(path), str(e), q=q)
            return None
        run_logger.cache_hit(str(path), q=q, records=len(sums.values))
        return sums

    def store(self, sums: CachedSums) -> Path:
        from primerace import __version__

        path = self.path_for(sums.q, sums.y, sums.limit)
        records = np.zeros(len(sums.values), dtype=RECORD_DTYPE)
        records["index"] = np.arange(len(sums.values), dtype=np.uint32)
        records["re"] = sums.values.real
        records["im"] = sums.values.imag
        header = HEADER.pack(
            self.config.Internal.CACHE_MAGIC,
            self.config.Internal.CACHE_FORMAT_VERSION,
            sums.q,
            int(sums.y),
            sums.limit,
            len(records),
            float(sums.principal),
            __version__.encode("ascii")[:16],
        )
        atomic_write_bytes(path, header + records.tobytes())
        run_logger.cache_write(str(path), len(records), q=sums.q)
        return path

    def _decode(self, blob: bytes, q: int, y: int, limit: int) -> CachedSums:
        if len(blob) < HEADER.size:
            raise CacheFormatError("truncated header")
        magic, fmt, fq, fy, flimit, count, principal, writer = HEADER.unpack_from(blob)
        if magic != self.config.Internal.CACHE_MAGIC:
            raise CacheFormatError("bad magic")
        if fmt != self.config.Internal.CACHE_FORMAT_VERSION:
            raise CacheFormatError(f"format version {fmt}")
        if not is_compatible_writer(writer.rstrip(b"\0").decode("ascii", "replace")):
            raise CacheFormatError("incompatible writer version")
        if (fq, fy, flimit) != (q, y, limit):
            raise CacheFormatError("key mismatch")
        expected = HEADER.size + count * RECORD_DTYPE.itemsize
        if len(blob) != expected:
            raise CacheFormatError(f"size {len(blob)} != {expected}")
        records = np.frombuffer(blob, dtype=RECORD_DTYPE, count=count, offset=HEADER.size)
        if not np.array_equal(records["index"], np.arange(count)):
            raise CacheFormatError("records out of order")
        values = records["re"] + 1j * records["im"]
        return CachedSums(
            q=q, y=y, limit=limit,
            values=values.astype(np.complex128),
            principal=principal,
        )


__all__ = ["CachedSums", "SmoothedSumCache", "atomic_write_bytes"]
