"""Empirical statistics of critical-line and random-model samples.

Component values are normalised by sqrt((n_F / 2) log log T), T being the
left end of the sampling window [T, 2T].  Samples flagged as rejected (too
close to a zero to fix the branch of log F) are excluded from every mean and
counted in the reports.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import special, stats

from . import rng
from .critline_eval import SampleSet, ZeroList, find_zeros_zeta, log_F_many, REJECTED
from .dirichlet_poly import DEFAULT_SMOOTHING, SmoothingChoice, dir_poly, smoothed_dir_poly
from .lfunc_registry import SpecError, make_zeta

logger = logging.getLogger(__name__)

MOMENT_MODES = ("min-abs", "max-abs", "neg-max-abs", "im-min", "im-neg-max", "product")
BOOTSTRAP_RESAMPLES = 200
#: Rejected fraction above which a report is not labelled clean.
CLEAN_REJECTED = 0.01
MIN_SAMPLES = 100


# ---------------------------------------------------------------------------
# Gaussian reference
# ---------------------------------------------------------------------------

def gaussian_tail(V) -> float:
    """prod_j Q(V_j), Q(v) = erfc(v / sqrt 2) / 2 the standard normal upper tail."""
    V = np.atleast_1d(np.asarray(V, dtype=float))
    return float(np.prod(0.5 * special.erfc(V / math.sqrt(2.0))))


def normalisation(samples: SampleSet) -> np.ndarray:
    """sqrt((n_F / 2) log log T) per component."""
    if samples.T <= math.e:
        raise ValueError("normalisation needs T > e")
    llt = math.log(math.log(samples.T))
    return np.array([math.sqrt(0.5 * s.n_F * llt) for s in samples.tup.specs])


def normalised_values(samples: SampleSet) -> np.ndarray:
    """Re e^{-i theta_j} log F_j / sqrt((n_F/2) log log T) for ok samples, shape (n, r)."""
    ok = samples.ok_mask()
    return samples.rotated()[ok] / normalisation(samples)[None, :]


# ---------------------------------------------------------------------------
# tails
# ---------------------------------------------------------------------------

@dataclass
class TailReport:
    V: tuple
    fraction: float
    std_error: float
    prediction: float
    ratio: float
    n_ok: int
    n_rejected: int
    T: float
    N: int
    fingerprint: str

    @property
    def clean(self) -> bool:
        return self.n_rejected <= CLEAN_REJECTED * (self.n_ok + self.n_rejected)


def tail_measure(samples: SampleSet, V) -> TailReport:
    """Fraction of ok samples whose normalised components all exceed V_j.

    Use ``-np.inf`` entries to leave a component unconstrained.
    """
    V = np.atleast_1d(np.asarray(V, dtype=float))
    if V.shape != (samples.r,):
        raise ValueError("V must have one entry per tuple component")
    vals = normalised_values(samples)
    n_ok = vals.shape[0]
    if n_ok == 0:
        raise ValueError("no usable samples")
    hit = np.all(vals > V[None, :], axis=1)
    frac = float(hit.mean())
    pred = gaussian_tail(V)
    return TailReport(tuple(float(v) for v in V), frac, math.sqrt(frac * (1 - frac) / n_ok),
                      pred, frac / pred if pred > 0 else math.inf, n_ok,
                      len(samples) - n_ok, samples.T, samples.N, samples.fingerprint)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------

@dataclass
class MomentReport:
    mode: str
    k: tuple
    T: float
    mean: float
    std_error: float
    predicted_exponent: float
    n_ok: int
    n_rejected: int
    fingerprint: str

    @property
    def clean(self) -> bool:
        return self.n_rejected <= CLEAN_REJECTED * (self.n_ok + self.n_rejected)


def predicted_exponent(tup, mode: str, k) -> float:
    """Growth exponent of the mode's mean in powers of log T."""
    n = np.array([s.n_F for s in tup.specs], dtype=float)
    if mode == "product":
        kv = np.broadcast_to(np.asarray(k, dtype=float), n.shape)
        return float(np.sum(n * kv**2))
    kk = float(np.atleast_1d(k)[0])
    if mode == "max-abs":
        return float(n.max()) * kk * kk
    return kk * kk / tup.h_F


def moment_integrand(logf: np.ndarray, mode: str, k) -> np.ndarray:
    """Per-sample integrand for a moment mode; ``logf`` has shape (n, r)."""
    re = logf.real
    im = logf.imag
    if mode == "product":
        kv = np.broadcast_to(np.asarray(k, dtype=float), (logf.shape[1],))
        return np.exp(2.0 * re @ kv)
    kk = float(np.atleast_1d(k)[0])
    if mode == "min-abs":
        return np.exp(2 * kk * re.min(axis=1))
    if mode == "max-abs":
        return np.exp(2 * kk * re.max(axis=1))
    if mode == "neg-max-abs":
        return np.exp(-2 * kk * re.max(axis=1))
    if mode == "im-min":
        return np.exp(2 * kk * im.min(axis=1))
    if mode == "im-neg-max":
        return np.exp(-2 * kk * im.max(axis=1))
    raise ValueError(f"unknown moment mode {mode!r}")


def bootstrap_se(values: np.ndarray, seed: int, resamples: int = BOOTSTRAP_RESAMPLES) -> float:
    """Standard deviation of resampled means (deterministic given the seed)."""
    if values.size < 2:
        return math.inf
    gen = rng.generator(seed, rng.TAG_BOOTSTRAP)
    means = np.empty(resamples)
    for b in range(resamples):
        means[b] = values[gen.integers(0, values.size, values.size)].mean()
    return float(means.std(ddof=1))


def moment_estimate(samples: SampleSet, mode: str, k, seed: Optional[int] = None) -> MomentReport:
    """Mean of the mode's integrand over ok samples, with a bootstrap error."""
    if mode not in MOMENT_MODES:
        raise ValueError(f"unknown moment mode {mode!r}; choose from {MOMENT_MODES}")
    kv = np.atleast_1d(np.asarray(k, dtype=float))
    if np.any(kv <= 0):
        raise ValueError("k must be positive")
    if mode == "product":
        if kv.size not in (1, samples.r):
            raise ValueError("product mode needs one k or one k per component")
    elif kv.size != 1:
        raise ValueError(f"mode {mode} takes a single k")
    ok = samples.ok_mask()
    n_ok = int(ok.sum())
    if n_ok == 0:
        raise ValueError("no usable samples")
    vals = moment_integrand(samples.logf[ok], mode, kv)
    se = bootstrap_se(vals, samples.seed if seed is None else seed)
    return MomentReport(mode, tuple(float(v) for v in kv), samples.T, float(vals.mean()), se,
                        predicted_exponent(samples.tup, mode, kv), n_ok, len(samples) - n_ok,
                        samples.fingerprint)


@dataclass
class FitReport:
    mode: str
    k: tuple
    T: tuple
    slope: float
    slope_se: float
    intercept: float
    predicted: float

    @property
    def discrepancy(self) -> float:
        return self.slope - self.predicted


def exponent_report(reports: Sequence[MomentReport], tup=None) -> FitReport:
    """Least-squares slope of log(mean) against log log T."""
    reports = list(reports)
    Ts = np.array([r.T for r in reports], dtype=float)
    if np.unique(Ts).size < 3:
        raise ValueError("need at least three distinct T values")
    modes = {r.mode for r in reports}
    if len(modes) != 1:
        raise ValueError("reports mix moment modes")
    x = np.log(np.log(Ts))
    y = np.log(np.array([r.mean for r in reports]))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    dof = x.size - 2
    resid = y - A @ coef
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = s2 * np.linalg.inv(A.T @ A)
    mode = reports[0].mode
    pred = predicted_exponent(tup, mode, reports[0].k) if tup is not None \
        else reports[0].predicted_exponent
    return FitReport(mode, reports[0].k, tuple(Ts), float(coef[0]), math.sqrt(cov[0, 0]),
                     float(coef[1]), pred)


# ---------------------------------------------------------------------------
# distribution diagnostics
# ---------------------------------------------------------------------------

def _column(samples, component: int) -> np.ndarray:
    if isinstance(samples, SampleSet):
        return normalised_values(samples)[:, component]
    arr = np.asarray(samples, dtype=float)
    return arr if arr.ndim == 1 else arr[:, component]


def ks_statistic(samples, component: int = 0) -> float:
    """sup |F_emp - Phi| of a normalised component (or of raw values)."""
    x = _column(samples, component)
    if x.size < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {x.size}")
    return float(stats.kstest(x, "norm").statistic)


def pearson_corr(samples, comp_i: int, comp_j: int) -> float:
    """Pearson correlation of two normalised components."""
    a = _column(samples, comp_i)
    b = _column(samples, comp_j)
    if a.size < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {a.size}")
    if np.std(a) == 0 or np.std(b) == 0:
        raise ValueError("zero variance component")
    return float(np.corrcoef(a, b)[0, 1])


def diff_moment(samples: SampleSet, X: float, k: float = 1.0, component: int = 0,
                poly=None, poly_t=None) -> tuple:
    """Mean of |log F - P_F(1/2 + i t, X)|^{2k} over ok samples, with its standard error.

    ``poly`` may carry precomputed P values; ``poly_t`` their ordinates, which
    must match the sample ordinates.
    """
    if poly is not None:
        if poly_t is None or np.shape(poly_t) != samples.t.shape or \
                not np.array_equal(np.asarray(poly_t), samples.t):
            raise ValueError("polynomial values and samples use different t")
        P = np.asarray(poly)
    else:
        P = dir_poly(samples.tup.specs[component], 0.5 + 1j * samples.t, X)
    ok = samples.ok_mask()
    d = np.abs(samples.logf[ok, component] - P[ok]) ** (2 * k)
    return float(d.mean()), float(d.std(ddof=1) / math.sqrt(d.size)) if d.size > 1 else math.inf


# ---------------------------------------------------------------------------
# hybrid formula residual
# ---------------------------------------------------------------------------

@dataclass
class HybridResult:
    t: np.ndarray
    X: float
    H: float
    residual: np.ndarray  # complex, NaN where rejected
    zero_terms: np.ndarray  # number of zeros within 1/log X
    rejected: np.ndarray
    zeros: ZeroList = field(repr=False)

    @property
    def rms(self) -> float:
        r = self.residual[~self.rejected]
        return float(np.sqrt(np.mean(np.abs(r) ** 2)))

    @property
    def n_rejected(self) -> int:
        return int(self.rejected.sum())


def zero_term(t: np.ndarray, gammas: np.ndarray, X: float) -> tuple:
    """sum over zeros with |1/2+it - rho| <= 1/log X of log((s - rho) log X).

    Zeros are taken on the critical line, so s - rho = i (t - gamma); the
    principal argument is +-pi/2 (and -pi/2 at t = gamma, the limit from below,
    where the logarithm itself diverges).
    """
    lx = math.log(X)
    radius = 1.0 / lx
    out = np.zeros(t.size, dtype=complex)
    count = np.zeros(t.size, dtype=int)
    lo = np.searchsorted(gammas, t - radius, side="left")
    hi = np.searchsorted(gammas, t + radius, side="right")
    for i in np.flatnonzero(hi > lo):
        d = t[i] - gammas[lo[i]:hi[i]]
        out[i] = np.sum(np.log(1j * d * lx))
        count[i] = d.size
    return out, count


def hybrid_residual(t, X: float, H: float = 1.0, smoothing: Optional[SmoothingChoice] = None,
                    zeros: Optional[ZeroList] = None) -> HybridResult:
    """R = log zeta(s) - smoothed polynomial - zero term at s = 1/2 + i t."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if smoothing is None:
        smoothing = SmoothingChoice(H=H) if H != DEFAULT_SMOOTHING.H else DEFAULT_SMOOTHING
    elif smoothing.H != H:
        raise ValueError("smoothing.H and H disagree")
    lx = math.log(X)
    if zeros is None:
        zeros = find_zeros_zeta(max(0.0, float(t.min()) - 1.0), float(t.max()) + 1.0)
    zeta = make_zeta()
    logz, quality = log_F_many(zeta, t)
    poly = smoothed_dir_poly(zeta, 0.5 + 1j * t, X, smoothing)
    gam = np.asarray(zeros.ordinates)
    zt, count = zero_term(t, gam, X)
    covered = (t - 1.0 / lx >= zeros.t0) & (t + 1.0 / lx <= zeros.t1)
    rejected = (quality == REJECTED) | ~covered | ~np.isfinite(zt)
    res = np.where(rejected, np.nan + 0j, logz - poly - zt)
    if rejected.any():
        logger.info("hybrid residual: %d of %d ordinates rejected", int(rejected.sum()), t.size)
    return HybridResult(t, float(X), float(H), res, count, rejected, zeros)
