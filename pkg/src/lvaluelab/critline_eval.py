"""Evaluation of L-functions near the critical line.

* :func:`eval_F` -- F(sigma + i t) to about 1e-9 relative accuracy for
  t <= 1e7: Euler-Maclaurin over residue classes (``_em``), the
  Riemann-Siegel formula for zeta on the critical line, and an mpmath path
  beyond ``EXTENDED_T``.
* :func:`log_F` -- the continuous branch of log F(1/2 + i t), obtained by
  following arg F along the horizontal segment from 3 + i t.
* :func:`find_zeros_zeta` -- zeros of zeta on the critical line.
* :func:`sample_line` -- stratified samples of log F over [T, 2T].
"""
from __future__ import annotations

import cmath
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy import special

from . import rng
from ._em import em_eval, partial_sums
from ._riemann_siegel import theta, z_function
from .lfunc_registry import LFunctionSpec, TupleConfig

logger = logging.getLogger(__name__)

ENVELOPE_T_MAX = 1.0e7
EXTENDED_T = 1.0e6
#: Bumped whenever stored log F values could change.
ENVELOPE_VERSION = "1"
#: Riemann-Siegel is used for zeta(1/2 + i t) from this height on.
RS_MIN_T = 1000.0
#: Below this height the whole log F path uses exact evaluations.
AFE_MIN_T = 2000.0
REJECT_ABS = 1e-12
#: An approximate value is used on the path only if |F| exceeds this multiple
#: of the error scale (observed errors stay below 0.5 of the scale).
AFE_TRUST = 1.25
SMALL_T_TAG = 50.0

OK, NEAR_ZERO_REFINED, REJECTED = 0, 1, 2
QUALITY_NAMES = {OK: "ok", NEAR_ZERO_REFINED: "near_zero_refined", REJECTED: "rejected"}

PATH_SIGMAS = (3.0, 2.0, 1.5, 1.2, 1.0, 0.9, 0.8, 0.72, 0.66, 0.61, 0.57, 0.54, 0.52)
_MAX_STEP = 0.5 * math.pi
_MIN_SEGMENT = 1e-9


class EnvelopeError(ValueError):
    """Requested evaluation outside the supported accuracy envelope."""


def _check_envelope(t):
    t = np.asarray(t, dtype=float)
    if t.size and (np.nanmax(np.abs(t)) > ENVELOPE_T_MAX or not np.all(np.isfinite(t))):
        raise EnvelopeError(f"|t| must be finite and <= {ENVELOPE_T_MAX:g}")


# ---------------------------------------------------------------------------
# evaluation of F
# ---------------------------------------------------------------------------

def _eval_extended(spec: LFunctionSpec, sigma: float, t: float) -> complex:
    """Slow high-precision path for very large t (mpmath)."""
    import mpmath as mp

    with mp.workdps(30):
        s = mp.mpc(sigma, t)
        if spec.kind == "zeta":
            return complex(mp.zeta(s))
        return complex(mp.dirichlet(s, [mp.mpc(c.real, c.imag) for c in spec.character_values]))


def eval_F(spec: LFunctionSpec, sigma, t):
    """F(sigma + i t), vectorised over ``sigma`` and ``t``.

    Returns a Python complex for scalar input and a complex array otherwise.
    """
    scalar = np.ndim(sigma) == 0 and np.ndim(t) == 0
    sig, tt = np.broadcast_arrays(np.asarray(sigma, dtype=float), np.asarray(t, dtype=float))
    _check_envelope(tt)
    if spec.pole_order and np.any((sig == 1.0) & (tt == 0.0)):
        raise ValueError("F has a pole at s = 1")
    sig = sig.ravel()
    tt = tt.ravel()
    out = np.empty(sig.size, dtype=complex)
    at = np.abs(tt)
    ext = at > EXTENDED_T
    rs = (~ext) & (spec.kind == "zeta") & (sig == 0.5) & (at >= RS_MIN_T)
    em = ~(ext | rs)
    if rs.any():
        # zeta(1/2 - i t) = conj zeta(1/2 + i t)
        val = np.exp(-1j * theta(at[rs])) * z_function(at[rs])
        out[rs] = np.where(tt[rs] < 0, np.conj(val), val)
    if em.any():
        out[em] = em_eval(spec.chi_array, sig[em], tt[em])
    for i in np.flatnonzero(ext):
        out[i] = _eval_extended(spec, sig[i], tt[i])
    if scalar:
        return complex(out[0])
    return out.reshape(np.broadcast(np.asarray(sigma), np.asarray(t)).shape)


def log_fe_factor(spec: LFunctionSpec, s):
    """log Delta(s) with F(s) = Delta(s) * conj-character F(1 - s).

    Delta(s) = eps (q/pi)^(1/2 - s) Gamma((1 - s + a)/2) / Gamma((s + a)/2),
    where a is the parity of the character (0 for zeta) and eps the root
    number.  The value is returned as a logarithm to avoid overflow.
    """
    s = np.asarray(s, dtype=complex)
    a = spec.parity
    eps = spec.root_number()
    return (cmath.log(eps) + (0.5 - s) * math.log(spec.q / math.pi)
            + special.loggamma((1 - s + a) / 2) - special.loggamma((s + a) / 2))


def afe_eval(spec: LFunctionSpec, sigma, t):
    """Approximate functional equation with two sums of length sqrt(q t / 2 pi).

    Cheap and accurate to roughly (q t / 2 pi)^(-sigma/2); used only to
    follow the argument of F along horizontal paths.
    """
    sig, tt = np.broadcast_arrays(np.asarray(sigma, dtype=float), np.asarray(t, dtype=float))
    n = np.maximum(1, np.floor(np.sqrt(spec.q * np.abs(tt) / (2 * math.pi)))).astype(np.int64)
    chi = spec.chi_array
    first = partial_sums(chi, sig, tt, n)
    # sum conj(chi(n)) n^(s-1) = sum conj(chi)(n) n^-((1-sigma) - i t)
    second = partial_sums(np.conj(chi), 1.0 - sig, -tt, n)
    s = sig + 1j * tt
    return first + np.exp(log_fe_factor(spec, s)) * second


def afe_error_scale(spec: LFunctionSpec, sigma, t):
    """Heuristic size of the approximate-functional-equation error."""
    x = np.maximum(spec.q * np.abs(np.asarray(t, dtype=float)) / (2 * math.pi), 1.0)
    return 2.0 * x ** (-np.asarray(sigma, dtype=float) / 2)


# ---------------------------------------------------------------------------
# branch-tracked logarithm
# ---------------------------------------------------------------------------

def _exact_grid(spec, sig, t):
    return eval_F(spec, np.asarray(sig, dtype=float), np.asarray(t, dtype=float))


def _refine_path(spec, t, sig, vals, max_iter=400):
    """Insert exact midpoints until every phase step is below the limit.

    Returns (total phase change, refined flag, ok flag).
    """
    sig = list(sig)
    vals = list(vals)
    refined = False
    for _ in range(max_iter):
        bad = None
        for k in range(len(sig) - 1):
            if abs(cmath.phase(vals[k + 1] / vals[k])) >= _MAX_STEP:
                bad = k
                break
        if bad is None:
            steps = [cmath.phase(vals[k + 1] / vals[k]) for k in range(len(sig) - 1)]
            return math.fsum(steps), refined, True
        lo, hi = sig[bad], sig[bad + 1]
        if abs(hi - lo) < _MIN_SEGMENT:
            return float("nan"), True, False
        mid = 0.5 * (lo + hi)
        v = complex(eval_F(spec, mid, t))
        if abs(v) < REJECT_ABS:
            return float("nan"), True, False
        sig.insert(bad + 1, mid)
        vals.insert(bad + 1, v)
        refined = True
    return float("nan"), True, False


def log_F_many(spec: LFunctionSpec, t, chunk: int = 4096):
    """Branch-tracked log F(1/2 + i t) for an array of t >= 0.

    The argument is followed along sigma = 3 -> 1/2 at fixed t (principal
    value at sigma = 3, where |F - 1| < 1/2).  Intermediate values come from
    the approximate functional equation where its (empirically calibrated)
    error bound is below |F|, and from exact evaluation otherwise.  Errors in
    intermediate values do not propagate (the end value is exact); they only
    need to be small enough not to change the branch.  Segments with a phase
    step of pi/2 or more are bisected with exact values.  The real part is log |F(1/2+it)|.

    At t = 0 a function with a pole at s = 1 takes the limit from below the
    real axis, so that Im log zeta(1/2) = +pi.

    Returns ``(log_values, quality)`` with quality codes OK,
    NEAR_ZERO_REFINED, REJECTED (rejected entries are NaN).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    _check_envelope(t)
    if np.any(t < 0):
        raise ValueError("log_F is defined here for t >= 0")
    out = np.full(t.size, np.nan + 1j * np.nan)
    quality = np.zeros(t.size, dtype=np.int8)
    for lo in range(0, t.size, chunk):
        sl = slice(lo, lo + chunk)
        out[sl], quality[sl] = _log_F_chunk(spec, t[sl])
    return out, quality


def _log_F_chunk(spec, t):
    if spec.pole_order and np.any(t == 0.0):
        # real-axis convention: pass below the pole at s = 1
        res = np.empty(t.size, dtype=complex)
        quality = np.zeros(t.size, dtype=np.int8)
        at_zero = t == 0.0
        if (~at_zero).any():
            res[~at_zero], quality[~at_zero] = _log_F_chunk(spec, t[~at_zero])
        v = eval_F(spec, 0.5, 0.0)
        res[at_zero] = math.log(abs(v)) + 1j * (math.pi if v.real < 0 else 0.0)
        return res, quality
    n = t.size
    path = np.array(PATH_SIGMAS)
    half = eval_F(spec, 0.5, t) if n else np.zeros(0, complex)
    vals = np.empty((n, path.size), dtype=complex)
    use_afe = t >= AFE_MIN_T
    if use_afe.any():
        tt = t[use_afe][:, None]
        approx = afe_eval(spec, path[None, :], tt)
        trusted = np.abs(approx) >= AFE_TRUST * afe_error_scale(spec, path[None, :], tt)
        rows, cols = np.nonzero(~trusted)
        if rows.size:
            approx[rows, cols] = _exact_grid(spec, path[cols], tt[rows, 0])
        vals[use_afe] = approx
    if (~use_afe).any():
        ts = t[~use_afe]
        vals[~use_afe] = _exact_grid(spec, np.broadcast_to(path, (ts.size, path.size)),
                                     np.broadcast_to(ts[:, None], (ts.size, path.size)))
    full = np.concatenate([vals, half[:, None]], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        steps = np.angle(full[:, 1:] / full[:, :-1])
    phase = np.angle(full[:, 0]) + steps.sum(axis=1)
    quality = np.zeros(n, dtype=np.int8)
    tiny = np.abs(half) < REJECT_ABS
    bad = np.any(np.abs(steps) >= _MAX_STEP, axis=1) | ~np.all(np.isfinite(steps), axis=1)
    sig_all = list(path) + [0.5]
    for i in np.flatnonzero(bad & ~tiny):
        total, refined, ok = _refine_path(spec, float(t[i]), sig_all, full[i])
        if ok:
            phase[i] = cmath.phase(full[i, 0]) + total
            quality[i] = NEAR_ZERO_REFINED if refined else 0
        else:
            quality[i] = REJECTED
    quality[tiny] = REJECTED
    with np.errstate(divide="ignore"):
        res = np.log(np.abs(half)) + 1j * phase
    res[quality == REJECTED] = np.nan + 1j * np.nan
    return res, quality


def log_F(spec: LFunctionSpec, t: float) -> complex:
    """Branch-tracked log F(1/2 + i t) for a single t (see :func:`log_F_many`).

    Raises ``ValueError`` if t is numerically on a zero ordinate.
    """
    vals, q = log_F_many(spec, np.array([float(t)]))
    if q[0] == REJECTED:
        raise ValueError(f"|F(1/2 + i t)| below {REJECT_ABS:g} at t = {t}; log undefined")
    return complex(vals[0])


# ---------------------------------------------------------------------------
# zeros of zeta on the critical line
# ---------------------------------------------------------------------------

def hardy_z(t) -> np.ndarray:
    """Hardy's Z(t) = exp(i theta(t)) zeta(1/2 + i t) (real for real t)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    big = t >= RS_MIN_T
    if big.any():
        out[big] = z_function(t[big])
    if (~big).any():
        ts = t[~big]
        out[~big] = np.real(np.exp(1j * theta(ts)) * em_eval(np.array([1.0 + 0j]), 0.5, ts))
    return out


def zero_count(t) -> np.ndarray:
    """N(t) = theta(t)/pi + 1 + S(t) with S from the branch-tracked log zeta."""
    zeta = _zeta_spec()
    t = np.atleast_1d(np.asarray(t, dtype=float))
    lv, q = log_F_many(zeta, t)
    return theta(t) / math.pi + 1.0 + lv.imag / math.pi


def smooth_zero_count(t) -> np.ndarray:
    """Riemann-von Mangoldt main term (t/2pi) log(t/2pi e) + 7/8."""
    t = np.asarray(t, dtype=float)
    return t / (2 * math.pi) * np.log(t / (2 * math.pi * math.e)) + 7.0 / 8.0


def _zeta_spec():
    from .lfunc_registry import make_zeta
    return make_zeta()


@dataclass
class ZeroList:
    """Zeros of zeta on the critical line in (t0, t1]."""

    ordinates: np.ndarray
    t0: float
    t1: float
    expected_count: int | None = None
    smooth_count: float = 0.0
    flagged: bool = False
    warnings: list = field(default_factory=list)

    def __len__(self):
        return int(self.ordinates.size)

    def covers(self, a: float, b: float) -> bool:
        return self.t0 <= a and b <= self.t1


def _bisect_zeros(lo, hi, zlo, tol=1e-9):
    lo = lo.copy()
    hi = hi.copy()
    zlo = zlo.copy()
    while lo.size and np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        zm = hardy_z(mid)
        same = np.sign(zm) == np.sign(zlo)
        lo = np.where(same, mid, lo)
        zlo = np.where(same, zm, zlo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def _scan(t0, t1, step):
    n = max(1, int(math.ceil((t1 - t0) / step)))
    grid = np.linspace(t0, t1, n + 1)
    zs = np.empty_like(grid)
    for i in range(0, grid.size, 1 << 16):
        zs[i:i + (1 << 16)] = hardy_z(grid[i:i + (1 << 16)])
    return grid, zs


def _roots_from_scan(grid, zs):
    exact = zs == 0.0
    roots = list(grid[exact])
    s = np.sign(zs)
    idx = np.flatnonzero((s[:-1] * s[1:]) < 0)
    if idx.size:
        roots.extend(_bisect_zeros(grid[idx], grid[idx + 1], zs[idx]))
    return np.unique(np.array(roots, dtype=float))


def find_zeros_zeta(t0: float, t1: float, step: float = 0.02) -> ZeroList:
    """All zeros 1/2 + i gamma of zeta with t0 < gamma <= t1.

    Sign changes of Z on a grid of the given step are bisected to 1e-9.
    The count is checked against N(t1) - N(t0) computed from theta and the
    branch-tracked argument; on mismatch the scan is repeated on finer grids.
    """
    if not 0 < t0 <= t1 or t1 > ENVELOPE_T_MAX:
        if t0 == t1 and t0 >= 0:
            return ZeroList(np.zeros(0), t0, t1, 0, 0.0)
        raise ValueError("need 0 < t0 <= t1 <= 1e7")
    if t0 == t1:
        return ZeroList(np.zeros(0), t0, t1, 0, 0.0)
    counts = zero_count(np.array([t0, t1]))
    expected = int(round(counts[1] - counts[0]))
    smooth = float(theta(t1) - theta(t0)) / math.pi
    warn_list = []
    cur = step
    roots = np.zeros(0)
    for _ in range(4):
        grid, zs = _scan(t0, t1, cur)
        roots = _roots_from_scan(grid, zs)
        roots = roots[(roots > t0) & (roots <= t1)]
        if roots.size == expected:
            break
        cur /= 4.0
        logger.info("zero count %d != expected %d on (%g, %g]; rescanning with step %g",
                    roots.size, expected, t0, t1, cur)
    if roots.size != expected:
        warn_list.append(f"found {roots.size} zeros, argument principle gives {expected}")
    flagged = abs(roots.size - smooth) > 2.0
    if flagged:
        warn_list.append(f"count {roots.size} deviates from smooth prediction {smooth:.2f} by > 2")
    for w in warn_list:
        warnings.warn(w, RuntimeWarning)
    return ZeroList(np.sort(roots), float(t0), float(t1), expected, smooth, flagged, warn_list)


# ---------------------------------------------------------------------------
# sampling over [T, 2T]
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CritSample:
    """One critical-line observation.

    ``values[j] = (Re e^{-i theta_j} log F_j, Im log F_j)`` at 1/2 + i t.
    """

    t: float
    values: tuple
    quality: str

    @property
    def small_t(self) -> bool:
        return self.t < SMALL_T_TAG


def sample_fingerprint(tup: TupleConfig, T: float, N: int, seed: int) -> str:
    from .hashing import fingerprint
    return fingerprint({"tuple": tup.canonical(), "T": float(T), "N": int(N), "seed": int(seed),
                        "envelope": ENVELOPE_VERSION})


@dataclass
class SampleSet:
    """Column store of critical-line samples for one tuple over [T, 2T]."""

    tup: TupleConfig
    T: float
    N: int
    seed: int
    t: np.ndarray
    logf: np.ndarray  # (N, r) complex
    quality: np.ndarray  # (N,) int8
    envelope_version: str = ENVELOPE_VERSION

    @property
    def fingerprint(self) -> str:
        return sample_fingerprint(self.tup, self.T, self.N, self.seed)

    @property
    def r(self) -> int:
        return self.tup.r

    def __len__(self):
        return int(self.t.size)

    def rotated(self) -> np.ndarray:
        """Re e^{-i theta_j} log F_j, shape (N, r)."""
        th = np.asarray(self.tup.thetas)
        return np.real(np.exp(-1j * th)[None, :] * self.logf)

    def imag(self) -> np.ndarray:
        return np.imag(self.logf)

    def ok_mask(self) -> np.ndarray:
        return self.quality != REJECTED

    def small_t_mask(self) -> np.ndarray:
        return self.t < SMALL_T_TAG

    def rejected_fraction(self) -> float:
        return float(np.mean(self.quality == REJECTED)) if len(self) else 0.0

    def component(self, j: int) -> "SampleSet":
        """Single-component view (same t, same seed)."""
        from .lfunc_registry import make_tuple
        sub = make_tuple([self.tup.specs[j]], [self.tup.thetas[j]])
        return SampleSet(sub, self.T, self.N, self.seed, self.t, self.logf[:, j:j + 1],
                         self.quality.copy(), self.envelope_version)

    def __iter__(self) -> Iterator[CritSample]:
        rot = self.rotated()
        im = self.imag()
        for i in range(len(self)):
            yield CritSample(float(self.t[i]),
                             tuple((float(rot[i, j]), float(im[i, j])) for j in range(self.r)),
                             QUALITY_NAMES[int(self.quality[i])])


def stratified_ordinates(T: float, N: int, seed: int) -> np.ndarray:
    """One uniform ordinate in each of the N strata of [T, 2T]."""
    u = rng.uniforms(seed, rng.TAG_T_SAMPLES, 0, N)
    width = T / N
    return T + (np.arange(N) + u) * width


def sample_line(tup: TupleConfig, T: float, N: int, seed: int) -> SampleSet:
    """Stratified samples of log F_j(1/2 + i t) for t in [T, 2T]."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if not 0 <= T and 2 * T <= ENVELOPE_T_MAX:
        raise EnvelopeError(f"[T, 2T] must lie in [0, {ENVELOPE_T_MAX:g}]")
    t = stratified_ordinates(T, N, seed)
    logf = np.empty((N, tup.r), dtype=complex)
    quality = np.zeros(N, dtype=np.int8)
    done: dict = {}
    for j, spec in enumerate(tup.specs):
        if spec.key not in done:
            logger.info("evaluating log %s at %d ordinates", spec.label, N)
            done[spec.key] = log_F_many(spec, t)
        vals, q = done[spec.key]
        logf[:, j] = vals
        quality = np.maximum(quality, q)
    res = SampleSet(tup, float(T), int(N), int(seed), t, logf, quality)
    frac = res.rejected_fraction()
    if frac > 0.01:
        warnings.warn(f"{frac:.2%} of samples rejected (near zeros)", RuntimeWarning)
    n_small = int(res.small_t_mask().sum())
    if n_small:
        logger.info("%d samples have t < %g (below the range of the hybrid formula)",
                    n_small, SMALL_T_TAG)
    return res
