"""Riemann-Siegel evaluation of Hardy's Z function.

    Z(t) = 2 sum_{n<=N} n^-1/2 cos(theta(t) - t log n)
           + (-1)^(N-1) a^-1/2 sum_{k=0}^{4} C_k(p) a^-k,

with a = sqrt(t / 2 pi), N = floor(a), p = a - N.  The coefficient functions
C_k are polynomials in x = p - 1/2 built from the Taylor series of

    Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p),

which is entire; its series is computed once in high precision with mpmath.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import special

TWO_PI = 2.0 * math.pi
_SERIES_ORDER = 70


@lru_cache(maxsize=1)
def _psi_series() -> np.ndarray:
    """Taylor coefficients of Psi in powers of x = p - 1/2."""
    import mpmath as mp

    with mp.workdps(80):
        n = _SERIES_ORDER
        # numerator -cos(2 pi x^2 - 5 pi / 8), a series in y = x^2
        num = [mp.mpf(0)] * (n + 1)
        for k in range(n // 2 + 1):
            num[2 * k] = -mp.cos(-5 * mp.pi / 8 + mp.pi / 2 * k) * (2 * mp.pi) ** k / mp.factorial(k)
        den = [mp.mpf(0)] * (n + 1)
        for k in range(n // 2 + 1):
            den[2 * k] = (-1) ** k * (2 * mp.pi) ** (2 * k) / mp.factorial(2 * k)
        coef = [mp.mpf(0)] * (n + 1)
        for i in range(n + 1):
            acc = num[i] - mp.fsum(coef[j] * den[i - j] for j in range(i))
            coef[i] = acc / den[0]
        return np.array([float(c) for c in coef])


@lru_cache(maxsize=1)
def correction_polys() -> tuple:
    """Polynomials (in x = p - 1/2) of the corrections C_0 .. C_4."""
    psi = _psi_series()

    def d(k):
        return npoly.polyder(psi, k) if k else psi

    pi2 = math.pi**2
    c0 = psi
    c1 = -d(3) / (96 * pi2)
    c2 = npoly.polyadd(d(2) / (64 * pi2), d(6) / (18432 * pi2**2))
    c3 = npoly.polyadd(npoly.polyadd(-d(1) / (64 * pi2), -d(5) / (3840 * pi2**2)),
                       -d(9) / (5308416 * pi2**3))
    c4 = npoly.polyadd(npoly.polyadd(d(0) / (128 * pi2), 19 * d(4) / (24576 * pi2**2)),
                       npoly.polyadd(11 * d(8) / (5898240 * pi2**3),
                                     d(12) / (2038431744 * pi2**4)))
    return tuple(np.trim_zeros(c, "b") for c in (c0, c1, c2, c3, c4))


def theta(t):
    """Riemann-Siegel theta function, Im log Gamma(1/4 + i t/2) - (t/2) log pi."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    big = np.abs(t) >= 50.0
    tb = t[big]
    # asymptotic expansion, accurate to double precision for t >= 50
    out[big] = (tb / 2 * np.log(tb / TWO_PI) - tb / 2 - math.pi / 8 + 1 / (48 * tb)
                + 7 / (5760 * tb**3) + 31 / (80640 * tb**5) + 381 / (1290240 * tb**7))
    ts = t[~big]
    out[~big] = np.imag(special.loggamma(0.25 + 0.5j * ts)) - ts / 2 * math.log(math.pi)
    return out if out.ndim else float(out)


def z_function(t, chunk: int = 2048) -> np.ndarray:
    """Hardy's Z(t) for t >= 200 (vectorised)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.size and t.min() < 200.0:
        raise ValueError("Riemann-Siegel path is used for t >= 200 only")
    polys = correction_polys()
    out = np.empty_like(t)
    for lo in range(0, t.size, chunk):
        tc = t[lo:lo + chunk]
        a = np.sqrt(tc / TWO_PI)
        nn = np.floor(a).astype(np.int64)
        nmax = int(nn.max())
        th = theta(tc)
        ks = np.arange(1, nmax + 1, dtype=float)
        logk = np.log(ks)
        phase = th[:, None] - tc[:, None] * logk[None, :]
        terms = np.cos(phase) / np.sqrt(ks)[None, :]
        terms[ks[None, :] > nn[:, None]] = 0.0
        main = 2.0 * terms.sum(axis=1)
        x = a - nn - 0.5
        inv = 1.0 / a
        corr = np.zeros_like(tc)
        for k, poly in enumerate(polys):
            corr += npoly.polyval(x, poly) * inv**k
        sign = np.where(nn % 2 == 1, 1.0, -1.0)
        out[lo:lo + chunk] = main + sign * corr / np.sqrt(a)
    return out


def zeta_half_line(t) -> np.ndarray:
    """zeta(1/2 + i t) = exp(-i theta(t)) Z(t) for t >= 200."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.exp(-1j * theta(t)) * z_function(t)
