"""Counter-based random streams.

Every stream is a Philox4x64 generator keyed by two 64-bit words, so the
value at position ``i`` of stream ``(seed, tag)`` can be produced without
generating the values before it.  This makes draws independent of the
order in which primes or strata are processed, and of the thread count.
"""
from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_SCALE = 1.0 / 9007199254740992.0  # 2**-53

#: Reserved stream tag for critical-line t-sampling (primes use their own value).
TAG_T_SAMPLES = 0
#: Reserved stream tag for bootstrap resampling.
TAG_BOOTSTRAP = 1


def uniforms(seed: int, tag: int, start: int, count: int) -> np.ndarray:
    """Uniform doubles in [0, 1) at positions ``start .. start+count-1``."""
    if count <= 0:
        return np.zeros(0)
    if seed < 0 or tag < 0:
        raise ValueError("seed and tag must be non-negative")
    # each Philox counter step yields four 64-bit words
    block, skip = divmod(int(start), 4)
    gen = np.random.Philox(key=[int(seed) & _MASK64, int(tag) & _MASK64], counter=block)
    raw = gen.random_raw(count + skip)[skip:]
    return (raw >> np.uint64(11)).astype(np.float64) * _SCALE


def angles(seed: int, tag: int, start: int, count: int) -> np.ndarray:
    """Uniform angles in [0, 2*pi) from the stream ``(seed, tag)``."""
    return 2.0 * np.pi * uniforms(seed, tag, start, count)


def generator(seed: int, tag: int) -> np.random.Generator:
    """A numpy Generator on the stream ``(seed, tag)`` (for non-indexed use)."""
    return np.random.Generator(np.random.Philox(key=[int(seed) & _MASK64, int(tag) & _MASK64]))
