"""Prime tables: a segmented sieve of Eratosthenes and prime-power enumeration.

Results are cached in memory; asking for a smaller limit reuses the largest
table built so far.
"""
from __future__ import annotations

import logging
import math
import threading

import numpy as np

logger = logging.getLogger(__name__)

#: Largest argument accepted by :func:`primes_up_to`.
SIEVE_LIMIT = 10**8

_SEGMENT = 1 << 21
_lock = threading.Lock()
_cache: dict = {"limit": 1, "primes": np.zeros(0, dtype=np.int64)}


class SieveLimitError(ValueError):
    """Raised when a prime table beyond :data:`SIEVE_LIMIT` is requested."""


def _simple_sieve(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def _segmented_sieve(n: int) -> np.ndarray:
    root = math.isqrt(n)
    base = _simple_sieve(root)
    chunks = [base]
    lo = root + 1
    while lo <= n:
        hi = min(lo + _SEGMENT, n + 1)
        flags = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            start = max(p * p, ((lo + p - 1) // p) * p)
            if start >= hi:
                continue
            flags[start - lo :: p] = False
        chunks.append(np.flatnonzero(flags).astype(np.int64) + lo)
        lo = hi
    return np.concatenate(chunks)


def primes_up_to(n: float) -> np.ndarray:
    """Return all primes ``p <= n`` as a sorted int64 array."""
    n = int(math.floor(n))
    if n > SIEVE_LIMIT:
        raise SieveLimitError(f"prime table requested up to {n}, limit is {SIEVE_LIMIT}")
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    with _lock:
        if n > _cache["limit"]:
            target = max(n, 2 * _cache["limit"]) if n < 10**7 else n
            target = min(target, SIEVE_LIMIT)
            logger.debug("sieving primes up to %d", target)
            _cache["primes"] = _segmented_sieve(target)
            _cache["limit"] = target
        table = _cache["primes"]
    return table[: np.searchsorted(table, n, side="right")]


def prime_powers_up_to(x: float):
    """Enumerate prime powers ``p**l <= x``.

    Returns three int64 arrays ``(n, p, l)`` sorted by ``n``.
    """
    ps = primes_up_to(x)
    if ps.size == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    ns, bases, exps = [ps], [ps], [np.ones_like(ps)]
    ell = 2
    cur = ps[ps <= math.isqrt(int(x))]
    while cur.size:
        powers = cur ** ell
        keep = powers <= x
        if not keep.any():
            break
        ns.append(powers[keep])
        bases.append(cur[keep])
        exps.append(np.full(int(keep.sum()), ell, dtype=np.int64))
        cur = cur[keep]
        ell += 1
    n = np.concatenate(ns)
    order = np.argsort(n, kind="stable")
    return n[order], np.concatenate(bases)[order], np.concatenate(exps)[order]

