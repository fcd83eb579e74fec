"""Random Euler-product model.

X(p), p prime, are independent and uniform on the unit circle.  For a tuple
(F_j, theta_j) the random polynomial of component j is

    P_j = sum_{p <= X} sum_{l >= 1} b_j(p^l) X(p)^l / p^{l/2}
        = sum_{p <= X} -log(1 - chi_j(p) X(p) / sqrt(p)),

and xi_j(p, phi) = Re(e^{-i theta_j} (-log(1 - chi_j(p) e^{i phi} / sqrt(p))))
is its contribution from one prime at angle phi.  The l-series is summed in
closed form, so Var(Re P_j) = sigma_F(X)^2 exactly.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import special

from . import rng
from .dirichlet_poly import K_local_many, sigma_F, tau_pair
from .lfunc_registry import TupleConfig
from .primes import SIEVE_LIMIT, primes_up_to

logger = logging.getLogger(__name__)

MGF_RTOL = 1e-12
MGF_MAX_NODES = 1 << 20
TILT_GRID = 4096


class QuadratureError(RuntimeError):
    """Periodic quadrature failed to converge."""


class TailBoundError(RuntimeError):
    """The infinite product could not be certified below the sieve limit."""

    def __init__(self, msg, attained):
        super().__init__(msg)
        self.attained = attained


# ---------------------------------------------------------------------------
# local terms
# ---------------------------------------------------------------------------

def _chi_matrix(tup: TupleConfig, ps: np.ndarray) -> np.ndarray:
    """chi_j(p) as an array of shape (len(ps), r)."""
    return np.stack([s.chi(ps) for s in tup.specs], axis=1)


def _neg_log_one_minus(u):
    """-log(1 - u) for |u| < 1, accurate for small u."""
    re = -0.5 * np.log1p(np.abs(u) ** 2 - 2.0 * u.real)
    im = -np.arctan2(-u.imag, 1.0 - u.real)
    return re + 1j * im


def xi_values(tup: TupleConfig, p, phi) -> np.ndarray:
    """xi_j(p, phi) for arrays p (broadcast with phi); returns shape (..., r)."""
    p = np.asarray(p)
    phi = np.asarray(phi, dtype=float)
    out = []
    for spec, th in zip(tup.specs, tup.thetas):
        u = spec.chi(p) * np.exp(1j * phi) / np.sqrt(p.astype(float))
        out.append(np.real(np.exp(-1j * th) * _neg_log_one_minus(u)))
    return np.stack(out, axis=-1)


def circle_average(func, n_nodes: int):
    """Trapezoid average of a 2 pi-periodic function over n equispaced nodes.

    Exact for trigonometric polynomials of degree < n, so the Fourier
    coefficients E[X^a] of the uniform law come out as delta_{a,0}.
    """
    phi = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    return np.mean(func(phi), axis=-1)


def _exponent(tup, p, z, phi):
    z = np.asarray(z)
    xi = xi_values(tup, np.full(phi.shape, p), phi)
    return xi @ z


def local_mgf(tup: TupleConfig, p: int, z, rtol: float = MGF_RTOL, return_nodes: bool = False):
    """E[exp(sum_j z_j xi_j(p, phi))] over a uniform angle phi.

    Periodic trapezoid rule; the node count doubles until successive values
    agree to ``rtol`` relative.
    """
    z = np.asarray(z)
    if z.shape != (tup.r,):
        raise ValueError("z must have one entry per tuple component")
    if not np.any(z):
        return (1.0, 1) if return_nodes else 1.0
    n = 16
    prev = None
    while n <= MGF_MAX_NODES:
        phi = 2.0 * np.pi * np.arange(n) / n
        val = np.mean(np.expm1(_exponent(tup, p, z, phi))) + 1.0
        if prev is not None and abs(val - prev) <= rtol * abs(val):
            out = val if np.iscomplexobj(z) else float(np.real(val))
            return (out, n) if return_nodes else out
        prev = val
        n *= 2
    raise QuadratureError(f"local MGF at p={p} did not converge with {MGF_MAX_NODES} nodes")


def local_mgf_minus_one(tup: TupleConfig, p: int, z, n_nodes: int = 256):
    """M_p(z) - 1 without cancellation (fixed node count)."""
    phi = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    return np.mean(np.expm1(_exponent(tup, p, np.asarray(z), phi)))


def _log_mgf_many(tup: TupleConfig, ps: np.ndarray, z, n_nodes: int) -> np.ndarray:
    """log M_p(z) for many primes with a fixed node count (log-sum-exp safe)."""
    z = np.asarray(z)
    phi = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    out = np.empty(ps.size, dtype=complex if np.iscomplexobj(z) else float)
    step = max(1, (1 << 20) // n_nodes)
    for lo in range(0, ps.size, step):
        pc = ps[lo:lo + step]
        xi = xi_values(tup, pc[:, None], phi[None, :])  # (np, n, r)
        e = xi @ z
        if np.iscomplexobj(z):
            m = np.max(e.real, axis=1, keepdims=True)
            out[lo:lo + step] = m[:, 0] + np.log(np.mean(np.exp(e - m), axis=1))
        else:
            small = np.max(np.abs(e), axis=1) < 0.5
            res = np.empty(pc.size)
            res[small] = np.log1p(np.mean(np.expm1(e[small]), axis=1))
            big = ~small
            if big.any():
                m = np.max(e[big], axis=1, keepdims=True)
                res[big] = m[:, 0] + np.log(np.mean(np.exp(e[big] - m), axis=1))
            out[lo:lo + step] = res
    return out


def _nodes_for(tup, p_min: float, z) -> int:
    """Node count that resolves exp(z . xi) for all p >= p_min to ~1e-16."""
    s = float(np.sum(np.abs(z)))
    a = 2.0 * max(s, 1e-3) / math.sqrt(p_min)  # bound on |z . xi| scale per harmonic
    n = 16
    # aliasing error ~ a^n / n!
    while n < MGF_MAX_NODES and n * math.log(max(a, 1e-300)) - special.gammaln(n + 1) > -40:
        n *= 2
    return n


def log_product_mgf(tup: TupleConfig, z, X: float) -> float:
    """sum_{p <= X} log M_p(z)."""
    z = np.asarray(z)
    if z.shape != (tup.r,):
        raise ValueError("z must have one entry per tuple component")
    ps = primes_up_to(X)
    if ps.size == 0 or not np.any(z):
        return 0.0
    total = 0.0
    small = ps[ps < 1000]
    for p in small:
        m = local_mgf(tup, int(p), z)
        total += np.log(m)
    large = ps[ps >= 1000]
    if large.size:
        total += np.sum(_log_mgf_many(tup, large, z, _nodes_for(tup, 1000.0, z)))
    return total if np.iscomplexobj(z) else float(np.real(total))


def product_mgf(tup: TupleConfig, z, X: float):
    """prod_{p <= X} M_p(z), accumulated in log space."""
    return np.exp(log_product_mgf(tup, z, X))


# ---------------------------------------------------------------------------
# Psi and Xi
# ---------------------------------------------------------------------------

@dataclass
class PsiResult:
    value: complex
    log_value: complex
    cutoff: int
    tail_estimate: complex
    tail_bound: float
    last_factor_gap: float


def _residue_modulus(tup: TupleConfig) -> int:
    q = 1
    for s in tup.specs:
        q = q * s.q // math.gcd(q, s.q)
    return q


def _second_order_coefficient(tup: TupleConfig, z, residues: np.ndarray) -> np.ndarray:
    """c(a) with log M_p - K/4 = c(p mod Q) / p^2 + O(p^-3)."""
    z = np.asarray(z, dtype=complex)
    chi = _chi_matrix(tup, residues)  # (n_res, r)
    c = np.exp(-1j * np.asarray(tup.thetas))
    A = (chi * c) @ z
    A2 = (np.conj(chi) * np.conj(c)) @ z
    B = (chi**2 * c) @ z / 2
    B2 = (np.conj(chi) ** 2 * np.conj(c)) @ z / 2
    return (A**2 * B2 + A2**2 * B) / 16 - (A * A2) ** 2 / 64


def _prime_tail_sum_p2(y: float) -> float:
    """sum_{p > y} p^-2 approximated by the integral of 1/(x^2 log x)."""
    return float(special.exp1(math.log(y)))


def psi(tup: TupleConfig, z, start: float = 1e4, limit: float = SIEVE_LIMIT,
        return_details: bool = False):
    """Psi(z) = prod_p M_p(z) / exp(K(p, z)/4).

    Factors are computed explicitly for p <= Y.  Beyond Y,
    log M_p - K/4 = c(p mod Q) p^-2 + O(p^-3) (odd powers of p^-1/2 vanish
    for degree-one Euler factors); the p^-2 part is added analytically with
    c averaged over reduced residues and sum_{p>Y} p^-2 ~ E_1(log Y).  The
    tail bound combines the O(p^-3) remainder, with its constant taken as
    twice the largest value of |log factor - c/p^2| p^3 over the last
    doubling block, and a prime-race allowance for the residue averaging.
    Y doubles until the last factor is within 1e-10 of one and the bound is
    below 1e-8.
    """
    z = np.asarray(z)
    if z.shape != (tup.r,):
        raise ValueError("z must have one entry per tuple component")
    if not np.any(z):
        res = PsiResult(1.0, 0.0, 0, 0.0, 0.0, 0.0)
        return res if return_details else 1.0
    complex_z = np.iscomplexobj(z)
    Q = _residue_modulus(tup)

    def coeff(ps):
        return _second_order_coefficient(tup, z, ps % Q if Q > 1 else np.zeros_like(ps))

    reduced = np.array([a for a in range(1, Q + 1) if math.gcd(a, Q) == 1] or [1])
    c_res = coeff(reduced)
    c_mean = np.mean(c_res)
    c_spread = float(np.max(np.abs(c_res - c_mean)))

    def log_terms(ps):
        out = np.empty(ps.size, dtype=complex)
        small = ps < 1000
        for i in np.flatnonzero(small):
            out[i] = np.log(complex(local_mgf(tup, int(ps[i]), z)))
        if (~small).any():
            pl = ps[~small]
            out[~small] = _log_mgf_many(tup, pl, z, _nodes_for(tup, float(pl.min()), z))
        return out - K_local_many(tup, ps, z) / 4

    Y = float(start)
    ps = primes_up_to(Y)
    terms = log_terms(ps)
    explicit = np.sum(terms)
    block = ps > Y / 2
    while True:
        pb = ps[block].astype(float)
        resid = np.abs(terms[block] - coeff(ps[block]) / pb**2) * pb**3
        c3 = 2.0 * float(resid.max()) if resid.size else 0.0
        tail = c_mean * _prime_tail_sum_p2(Y)
        bound = c3 / (2.0 * Y**2 * math.log(Y)) + 2.0 * c_spread * math.log(Y) / Y**1.5
        gap = float(np.abs(terms[-1])) if terms.size else 0.0
        if gap < 1e-10 and bound < 1e-8:
            break
        if 2 * Y > limit:
            raise TailBoundError(f"Psi tail bound {bound:.3g} not reached below {limit:g}", bound)
        ps = primes_up_to(2 * Y)
        ps = ps[ps > Y]
        terms = log_terms(ps)
        explicit = explicit + np.sum(terms)
        block = np.ones(ps.size, dtype=bool)
        Y *= 2
    total = explicit + tail
    log_val = total if complex_z else float(np.real(total))
    value = np.exp(log_val)
    if return_details:
        return PsiResult(value, log_val, int(Y), tail, bound, gap)
    return value


def xi(tup: TupleConfig, x, X: float, return_details: bool = False):
    """Xi_X(x) = exp(sum_{j1<j2} x_j1 x_j2 tau_{j1,j2}(X)) Psi(x)."""
    x = np.asarray(x)
    cross = 0.0
    for a in range(tup.r):
        for b in range(a + 1, tup.r):
            cross += x[a] * x[b] * tau_pair(tup.specs[a], tup.specs[b], tup.thetas[a],
                                            tup.thetas[b], X)
    res = psi(tup, x, return_details=True)
    value = np.exp(cross + res.log_value)
    if not np.iscomplexobj(x):
        value = float(np.real(value))
    return (value, res) if return_details else value


def gmdp_prediction(tup: TupleConfig, k: float, X: float) -> float:
    """Main term for the average of exp(2k min_j Re e^{-i theta_j} P_j).

    exp(k^2 H) prod sigma_j / ((sqrt(2 pi) k H)^(r-1) sqrt(H/2))
    * Xi_X(k H / sigma_1^2, ..., k H / sigma_r^2),
    with H = 2 / sum_j sigma_j^-2.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    sig = np.array([sigma_F(s, X) for s in tup.specs])
    if np.any(sig == 0):
        raise ValueError("sigma_F(X) vanishes; need X >= 2 for every component")
    H = 2.0 / np.sum(sig**-2.0)
    r = tup.r
    pref = math.exp(k * k * H) * float(np.prod(sig)) / (
        (math.sqrt(2 * math.pi) * k * H) ** (r - 1) * math.sqrt(H / 2))
    return pref * xi(tup, k * H / sig**2, X)


def harmonic_H(tup: TupleConfig, X: float) -> float:
    sig = np.array([sigma_F(s, X) for s in tup.specs])
    return float(2.0 / np.sum(sig**-2.0))


# ---------------------------------------------------------------------------
# Monte Carlo draws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RandomDraw:
    """One realisation {X(p)}_{p <= X} and the induced component values."""

    seed: int
    index: int
    X: float
    values: tuple
    tup: TupleConfig = field(repr=False, compare=False, default=None)

    @property
    def seed_path(self) -> tuple:
        return (self.seed, self.index)

    def angles(self) -> dict:
        """Regenerate {p: angle} for this draw from the counter-based streams."""
        return {int(p): float(rng.angles(self.seed, int(p), self.index, 1)[0])
                for p in primes_up_to(self.X)}

    def recompute(self) -> np.ndarray:
        ang = self.angles()
        if not ang:
            return np.zeros(len(self.values))
        ps = np.array(list(ang.keys()))
        phi = np.array(list(ang.values()))
        return xi_values(self.tup, ps, phi).sum(axis=0)


@dataclass
class RandomDrawSet:
    """N draws of the random model for one tuple (values: shape (N, r))."""

    tup: TupleConfig
    X: float
    seed: int
    values: np.ndarray

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, i) -> RandomDraw:
        return RandomDraw(self.seed, int(i), self.X, tuple(self.values[i]), self.tup)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


def random_poly_samples(tup: TupleConfig, X: float, N: int, seed: int,
                        start: int = 0) -> RandomDrawSet:
    """Values Re e^{-i theta_j} P_j for draws start .. start+N-1.

    Draw i uses position i of the stream keyed by (seed, p) for every prime
    p, so any block of draws can be regenerated independently.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    ps = primes_up_to(X)
    vals = np.zeros((N, tup.r))
    for p in ps:
        phi = rng.angles(seed, int(p), start, N)
        vals += xi_values(tup, np.full(N, p), phi)
    return RandomDrawSet(tup, float(X), int(seed), vals)


# ---------------------------------------------------------------------------
# tail probabilities
# ---------------------------------------------------------------------------

@dataclass
class TailEstimate:
    """Estimate of P(Re e^{-i theta_j} P_j > V_j sigma_j(X) for all j)."""

    estimate: float
    std_error: float
    N: int
    X: float
    V: tuple
    tilt: tuple
    seed: int
    ess: float
    warnings: list = field(default_factory=list)

    @property
    def rel_error(self) -> float:
        return self.std_error / self.estimate if self.estimate > 0 else math.inf


def direct_tail_estimate(tup: TupleConfig, X: float, V: Sequence[float], N: int,
                         seed: int) -> TailEstimate:
    """Plain Monte Carlo estimate of the joint tail."""
    V = np.asarray(V, dtype=float)
    sig = np.array([sigma_F(s, X) for s in tup.specs])
    draws = random_poly_samples(tup, X, N, seed)
    hit = np.all(draws.values > V * sig, axis=1)
    p = float(hit.mean())
    return TailEstimate(p, math.sqrt(p * (1 - p) / N), N, float(X), tuple(V),
                        tuple(np.zeros(tup.r)), seed, float(N))


def _tilted_grid(tup, p, x, size):
    """Node values of the tilted density and the refined grid size."""
    while True:
        phi = 2.0 * np.pi * np.arange(size + 1) / size
        g = np.exp(xi_values(tup, np.full(phi.shape, p), phi) @ x)
        # trapezoid on size vs size/2 nodes of the periodic density
        full = np.mean(g[:-1])
        half = np.mean(g[:-1:2])
        if abs(full - half) <= 1e-6 * full or size >= MGF_MAX_NODES:
            return g, size
        size *= 4


def tilted_tail_estimate(tup: TupleConfig, X: float, V: Sequence[float],
                         x: Optional[Sequence[float]] = None, N: int = 100_000,
                         seed: int = 0) -> TailEstimate:
    """Importance-sampling estimate of the joint tail with an exponential tilt.

    Each angle is drawn from a density proportional to exp(sum_j x_j xi_j(p, phi)),
    discretised as a piecewise-constant density on a 4096-cell grid (cell
    mass = trapezoid of the node values) and sampled by inverse CDF.  The
    likelihood ratio against the uniform law uses that exact proposal
    density, so the estimator is unbiased.  Default tilt:
    x_j = max(1, V_j) / sigma_j(X).
    """
    V = np.asarray(V, dtype=float)
    sig = np.array([sigma_F(s, X) for s in tup.specs])
    if x is None:
        x = np.maximum(1.0, V) / np.where(sig > 0, sig, 1.0)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("tilt parameters must be positive")
    ps = primes_up_to(X)
    vals = np.zeros((N, tup.r))
    logw = np.zeros(N)
    for p in ps:
        g, size = _tilted_grid(tup, int(p), x, TILT_GRID)
        cell = 0.5 * (g[:-1] + g[1:])
        cdf = np.concatenate([[0.0], np.cumsum(cell)])
        total = cdf[-1]
        u = rng.uniforms(seed, int(p), 0, N) * total
        c = np.clip(np.searchsorted(cdf, u, side="right") - 1, 0, size - 1)
        frac = (u - cdf[c]) / cell[c]
        phi = 2.0 * np.pi * (c + frac) / size
        vals += xi_values(tup, np.full(N, p), phi)
        logw += np.log(total / size) - np.log(cell[c])
    hit = np.all(vals > V * sig, axis=1)
    w = np.where(hit, np.exp(logw), 0.0)
    est = float(w.mean())
    se = float(w.std(ddof=1) / math.sqrt(N)) if N > 1 else math.inf
    wall = np.exp(logw)
    ess = float(wall.sum() ** 2 / np.sum(wall**2))
    ess_hits = float(w.sum() ** 2 / np.sum(w**2)) if np.any(w > 0) else 0.0
    notes = []
    if ess_hits < 100:
        msg = f"effective sample size {ess_hits:.1f} < 100"
        notes.append(msg)
        warnings.warn(msg, RuntimeWarning)
    return TailEstimate(est, se, N, float(X), tuple(V), tuple(x), seed, ess_hits, notes)
