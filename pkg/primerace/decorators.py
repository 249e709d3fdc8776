"""
PRIMERACE Decorators

Provides thread-safe helpers for expensive pure computations:
- memoize_once: per-key at-most-once memoisation
- timed: debug-level timing of a call
"""

import functools
import logging
import threading
import time
from typing import Any, Callable, Dict, Hashable, Optional

logger = logging.getLogger(__name__)


class OnceCache:
    """
    Thread-safe memo table computing each key at most once.

    Concurrent callers asking for a key that is being computed wait on that
    key's lock; callers of other keys are not blocked.
    """

    def __init__(self, max_entries: Optional[int] = None):
        self._values: Dict[Hashable, Any] = {}
        self._key_locks: Dict[Hashable, threading.Lock] = {}
        self._lock = threading.Lock()
        self._max_entries = max_entries

    def get_or_compute(self, key: Hashable, compute: Callable[[], Any]) -> Any:
        try:
            return self._values[key]
        except KeyError:
            pass

        with self._lock:
            key_lock = self._key_locks.setdefault(key, threading.Lock())

        with key_lock:
            # Double-checked: another thread may have finished meanwhile
            if key in self._values:
                return self._values[key]
            value = compute()
            with self._lock:
                if self._max_entries is not None and len(self._values) >= self._max_entries:
                    oldest = next(iter(self._values))
                    del self._values[oldest]
                    self._key_locks.pop(oldest, None)
                self._values[key] = value
            return value

    def __contains__(self, key: Hashable) -> bool:
        return key in self._values

    def __len__(self) -> int:
        return len(self._values)

    def clear(self) -> None:
        with self._lock:
            self._values.clear()
            self._key_locks.clear()


def memoize_once(func: Optional[Callable] = None, *, max_entries: Optional[int] = None, key: Optional[Callable[..., Hashable]] = None):
    """
    Memoize a pure function with at-most-once computation per argument key.

    Args:
        max_entries: Evict the oldest entry beyond this many (None = unbounded)
        key: Optional function mapping call arguments to a cache key

    Usage:
        @memoize_once
        def character_group(q): ...

        @memoize_once(max_entries=2)
        def prime_power_weights(y, factor=2.0): ...

    The wrapped function exposes ``cache`` (the OnceCache) and
    ``cache_clear()``.
    """
    def decorator(fn: Callable) -> Callable:
        store = OnceCache(max_entries=max_entries)

        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            cache_key: Hashable
            if key is not None:
                cache_key = key(*args, **kwargs)
            else:
                cache_key = (args, tuple(sorted(kwargs.items())))
            return store.get_or_compute(cache_key, lambda: fn(*args, **kwargs))

        wrapper.cache = store  # type: ignore[attr-defined]
        wrapper.cache_clear = store.clear  # type: ignore[attr-defined]
        return wrapper

    if func is not None:
        return decorator(func)
    return decorator


def timed(label: Optional[str] = None):
    """
    Log the wall-clock duration of a call at DEBUG level.

    Usage:
        @timed("segmented sieve")
        def segmented_sieve(...): ...
    """
    def decorator(fn: Callable) -> Callable:
        name = label or fn.__qualname__
        fn_logger = logging.getLogger(fn.__module__)

        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            try:
                return fn(*args, **kwargs)
            finally:
                fn_logger.debug(f"{name} took {time.perf_counter() - start:.3f}s")

        return wrapper

    return decorator


__all__ = ["OnceCache", "memoize_once", "timed"]
