"""Dirichlet polynomials over prime powers, smoothing weights, variances.

Conventions: ``P_F(s, X) = sum_{p^l <= X} b_F(p^l) p^{-l s}`` and
``sigma_F(X)^2 = 1/2 sum_{p <= X} sum_{l >= 1} |b_F(p^l)|^2 / p^l``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .lfunc_registry import LFunctionSpec, SpecError, TupleConfig
from .primes import prime_powers_up_to, primes_up_to

#: The l-series stops once p^l exceeds this multiple of p (relative size 1e-18).
ELL_RELATIVE = 1e18


# ---------------------------------------------------------------------------
# prime-power data
# ---------------------------------------------------------------------------

def _terms(spec: LFunctionSpec, X: float):
    """(n, log n, b(n)) for prime powers n <= X."""
    n, p, ell = prime_powers_up_to(X)
    if n.size == 0:
        return n.astype(float), n.astype(float), np.zeros(0, dtype=complex)
    b = spec.coeff_b(p, ell)
    return n.astype(float), np.log(n.astype(float)), b


def _sum_over_terms(logn, coef, s, chunk=1 << 22):
    """sum_k coef_k exp(-s log n_k) for each s in a 1-d complex array."""
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    out = np.zeros(s.size, dtype=complex)
    if logn.size == 0:
        return out
    rows = max(1, chunk // logn.size)
    for lo in range(0, s.size, rows):
        sc = s[lo:lo + rows]
        out[lo:lo + rows] = np.exp(-np.outer(sc, logn)) @ coef
    return out


def dir_poly(spec: LFunctionSpec, s, X: float):
    """P_F(s, X) = sum_{p^l <= X} b_F(p^l) p^{-l s} (vectorised over s)."""
    scalar = np.ndim(s) == 0
    _, logn, b = _terms(spec, X)
    out = _sum_over_terms(logn, b, np.ravel(s))
    return complex(out[0]) if scalar else out.reshape(np.shape(s))


# ---------------------------------------------------------------------------
# l-series sums over primes
# ---------------------------------------------------------------------------

def _ell_series(p: np.ndarray, ratio: np.ndarray) -> np.ndarray:
    """sum_{l >= 1} ratio^l / (l^2 p^l) per prime, ratio complex with |ratio| <= 1.

    Terms are summed until p^(l-1) exceeds ``ELL_RELATIVE``; the omitted
    remainder is below ell_tail_bound(p), i.e. < 1e-18 of the first term.
    """
    p = p.astype(float)
    out = np.zeros(p.size, dtype=complex)
    power = np.ones(p.size, dtype=complex)
    pl = np.ones(p.size)
    ell = 1
    active = np.ones(p.size, dtype=bool)
    while active.any():
        pl = np.where(active, pl * p, pl)
        power = np.where(active, power * ratio, power)
        out[active] += power[active] / (ell * ell * pl[active])
        active &= pl <= ELL_RELATIVE
        ell += 1
    return out


def ell_tail_bound(p: float) -> float:
    """Bound on the omitted part of sum_l 1/(l^2 p^l) for a single prime."""
    L = int(math.floor(math.log(ELL_RELATIVE) / math.log(p))) + 1
    x = 1.0 / p
    return x ** (L + 1) / ((L + 1) ** 2 * (1 - x))


def sigma_F(spec: LFunctionSpec, X: float) -> float:
    """sigma_F(X) = sqrt(1/2 sum_{p <= X} sum_l |b(p^l)|^2 / p^l)."""
    ps = primes_up_to(X)
    if ps.size == 0:
        return 0.0
    ratio = np.abs(spec.chi(ps)) ** 2
    return math.sqrt(0.5 * float(np.sum(_ell_series(ps, ratio.astype(complex)).real)))


def tau_pair(spec_i: LFunctionSpec, spec_j: LFunctionSpec, theta_i: float, theta_j: float,
             X: float) -> float:
    """1/2 sum_{p<=X} sum_l Re(e^{-i th_i} b_i(p^l) conj(e^{-i th_j} b_j(p^l))) / p^l."""
    ps = primes_up_to(X)
    if ps.size == 0:
        return 0.0
    ratio = spec_i.chi(ps) * np.conj(spec_j.chi(ps))
    rot = np.exp(-1j * (theta_i - theta_j))
    return 0.5 * float(np.sum((rot * _ell_series(ps, ratio)).real))


def K_local(tup: TupleConfig, p: int, z) -> complex:
    """sum_{j1,j2} z_j1 z_j2 sum_l Re(e^{-i th_j1} b_j1(p^l) conj(e^{-i th_j2} b_j2(p^l))) / p^l."""
    z = np.asarray(z)
    if z.shape != (tup.r,):
        raise ValueError("z must have one entry per tuple component")
    pa = np.array([p])
    total = 0j
    for a, (sa, ta) in enumerate(zip(tup.specs, tup.thetas)):
        for b, (sb, tb) in enumerate(zip(tup.specs, tup.thetas)):
            ratio = sa.chi(pa) * np.conj(sb.chi(pa))
            val = float((np.exp(-1j * (ta - tb)) * _ell_series(pa, ratio))[0].real)
            total += z[a] * z[b] * val
    return total if np.iscomplexobj(z) else complex(total.real)


def K_local_many(tup: TupleConfig, ps: np.ndarray, z) -> np.ndarray:
    """Vectorised :func:`K_local` over an array of primes (real z)."""
    z = np.asarray(z, dtype=complex)
    total = np.zeros(ps.size, dtype=complex)
    for a, (sa, ta) in enumerate(zip(tup.specs, tup.thetas)):
        for b, (sb, tb) in enumerate(zip(tup.specs, tup.thetas)):
            ratio = sa.chi(ps) * np.conj(sb.chi(ps))
            total += z[a] * z[b] * (np.exp(-1j * (ta - tb)) * _ell_series(ps, ratio)).real
    return total


# ---------------------------------------------------------------------------
# smoothing
# ---------------------------------------------------------------------------

def bump(x):
    """f(x) = 140 x^3 (1-x)^3 on [0, 1], zero outside."""
    x = np.asarray(x, dtype=float)
    inside = (x >= 0) & (x <= 1)
    return np.where(inside, 140.0 * x**3 * (1 - x) ** 3, 0.0)


def bump_cdf(y):
    """int_0^y f for the default bump (clipped to [0, 1])."""
    y = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)
    return 140.0 * (y**4 / 4 - 3 * y**5 / 5 + y**6 / 2 - y**7 / 7)


@dataclass(frozen=True)
class SmoothingChoice:
    """Bump f on [0, 1] (mass one), scale H >= 1 and smoothness order D_f.

    ``cdf`` is the antiderivative of f from 0; if omitted it is computed by
    adaptive quadrature.  The default bump is C^2 on the real line.
    """

    f: Callable = bump
    H: float = 1.0
    D_f: int = 4
    cdf: Optional[Callable] = bump_cdf

    def __post_init__(self):
        if self.H < 1:
            raise ValueError("H must be >= 1")
        if self.D_f < 2:
            raise ValueError("D(f) must be at least 2")
        nodes, weights = np.polynomial.legendre.leggauss(64)
        mass = 0.5 * float(np.dot(weights, self.f(0.5 * (nodes + 1.0))))
        if abs(mass - 1.0) > 1e-10:
            raise ValueError(f"bump has mass {mass!r}, expected 1")
        grid = np.linspace(0, 1, 1001)
        if np.any(np.asarray(self.f(grid)) < 0):
            raise ValueError("bump must be non-negative")

    def F(self, y):
        if self.cdf is not None:
            return self.cdf(y)
        y = np.atleast_1d(np.clip(np.asarray(y, dtype=float), 0, 1))
        return np.array([integrate.quad(lambda x: float(self.f(x)), 0, v)[0] for v in y])


DEFAULT_SMOOTHING = SmoothingChoice()


def weight_v(y, smoothing: SmoothingChoice = DEFAULT_SMOOTHING):
    """v_{f,H}(y) = 1 - F(H (log y - 1)): 1 for y <= e, 0 for y >= e^{1 + 1/H}."""
    scalar = np.ndim(y) == 0
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y <= 0):
        raise ValueError("weight_v needs y > 0")
    arg = smoothing.H * (np.log(y) - 1.0)
    out = np.where(arg <= 0, 1.0, np.where(arg >= 1, 0.0, np.clip(1.0 - smoothing.F(np.clip(arg, 0, 1)), 0.0, 1.0)))
    return float(out[0]) if scalar else out


def smoothed_dir_poly(spec: LFunctionSpec, s, X: float,
                      smoothing: SmoothingChoice = DEFAULT_SMOOTHING):
    """sum_{2 <= n <= X^{1+1/H}} Lambda_F(n) v(e^{log n / log X}) / (n^s log n)."""
    scalar = np.ndim(s) == 0
    if X <= 1:
        raise ValueError("X must exceed 1")
    top = X ** (1.0 + 1.0 / smoothing.H)
    n, logn, b = _terms(spec, top)
    w = weight_v(np.exp(logn / math.log(X)), smoothing) if n.size else np.zeros(0)
    out = _sum_over_terms(logn, b * w, np.ravel(s))
    return complex(out[0]) if scalar else out.reshape(np.shape(s))


# ---------------------------------------------------------------------------
# the window w_X and the diagnostic sum
# ---------------------------------------------------------------------------

def window_branches(s):
    """The three pieces of w_X as functions of s = log y / log X.

    With a = log(X^3/y), b = log(X^2/y):  1;  (a^2 - 2 b^2) / (2 log^2 X) = 1 - (s-1)^2/2;
    a^2 / (2 log^2 X) = (3-s)^2/2.  In this form the pieces agree exactly at s = 1 and s = 2.
    """
    s = np.asarray(s, dtype=float)
    return np.ones_like(s), 1.0 - 0.5 * (s - 1.0) ** 2, 0.5 * (3.0 - s) ** 2


def window_w_X(y, X: float):
    """Piecewise weight on [1, X^3]: 1, then two quadratic-in-log pieces."""
    scalar = np.ndim(y) == 0
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if X <= 1:
        raise ValueError("X must exceed 1")
    s = np.log(y) / math.log(X)
    if np.any(s < -1e-12) or np.any(s > 3 * (1 + 1e-12)):
        raise ValueError("window_w_X is defined for 1 <= y <= X^3")
    first, mid, last = window_branches(s)
    out = np.where(s <= 1, first, np.where(s <= 2, mid, np.maximum(last, 0.0)))
    return float(out[0]) if scalar else out


def diagnostic_wsum(spec: LFunctionSpec, t, X: float):
    """sum_{n <= X^3} Lambda(n) w_X(n) / n^{sigma + i t} with sigma = 1/2 + 4/log X (zeta only)."""
    if spec.kind != "zeta":
        raise SpecError("diagnostic_wsum is implemented for zeta only")
    scalar = np.ndim(t) == 0
    sigma = 0.5 + 4.0 / math.log(X)
    n, logn, b = _terms(spec, X**3)
    coef = b * logn * window_w_X(n, X) if n.size else b
    out = _sum_over_terms(logn, coef, sigma + 1j * np.ravel(np.asarray(t, dtype=float)))
    return complex(out[0]) if scalar else out.reshape(np.shape(t))
