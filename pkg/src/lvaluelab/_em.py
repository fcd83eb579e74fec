"""Euler-Maclaurin evaluation of periodic Dirichlet series.

For a q-periodic coefficient sequence chi(n),

    F(s) = sum_{n <= m q} chi(n) n^-s  +  q^-s sum_{a=1}^{q} chi(a) zeta(s, m + a/q),

and each Hurwitz tail zeta(s, w) is expanded as

    w^(1-s)/(s-1) + w^-s/2 + sum_k B_2k/(2k)! (s)_(2k-1) w^(-s-2k+1).

The main sum is compensated (Kahan) and uses phase reduction modulo one
turn: ``t log n / 2 pi`` is precomputed per n and only its fractional part
enters the trigonometric functions.
"""
from __future__ import annotations

import math
import threading

import numba
import numpy as np
from scipy import special

TWO_PI = 2.0 * math.pi

#: Admissible ratio |s| / (2 pi w) at the Hurwitz cut point (small / large |s|).
RHO = 0.7
RHO_LARGE = 0.9
#: Minimal Hurwitz parameter w at the cut point.
W_MIN = 10
K_MAX = 400

# c_k = B_2k/(2k)! computed as (-1)^(k+1) 2 zeta(2k) / (2 pi)^(2k); stored as
# the ratios c_{k+1}/c_k so nothing overflows.
_k = np.arange(1, K_MAX + 2, dtype=float)
_zeta_even = special.zeta(2 * _k, 1)
C_RATIO = -_zeta_even[1:] / (_zeta_even[:-1] * TWO_PI**2)
C_RATIO_NB = C_RATIO.copy()

_tables_lock = threading.Lock()
_tables = {"n": 0, "log": np.zeros(1), "turn": np.zeros(1), "rsqrt": np.zeros(1)}


def log_tables(n_max: int):
    """Arrays ``log n``, ``log n / 2 pi`` and ``n^-1/2`` for n = 0..n_max."""
    with _tables_lock:
        if _tables["n"] < n_max:
            size = max(n_max, int(_tables["n"] * 1.5), 1 << 14)
            n = np.arange(size + 1, dtype=float).clip(1.0)
            logs = np.log(n)
            _tables["log"] = logs
            _tables["turn"] = logs / TWO_PI
            _tables["rsqrt"] = 1.0 / np.sqrt(n)
            _tables["n"] = size
        return _tables["log"], _tables["turn"], _tables["rsqrt"]


def cut_periods(sigma: float, t: float, q: int) -> int:
    """Number m of full periods summed directly before the Hurwitz tail."""
    mod_s = math.hypot(sigma, t)
    rho = RHO_LARGE if mod_s > 1000.0 else RHO
    return max(W_MIN, int(math.ceil((mod_s + 1.0) / (TWO_PI * rho))))


@numba.njit(cache=True)
def _hurwitz_tail(sr, si, w, tol):
    """zeta(s, w) minus the part summed directly, for Re w large."""
    lw = math.log(w)
    # w^-s
    mag = math.exp(-sr * lw)
    ph = -si * lw
    wsr = mag * math.cos(ph)
    wsi = mag * math.sin(ph)
    # w^(1-s)/(s-1)
    ar = wsr * w
    ai = wsi * w
    dr = sr - 1.0
    di = si
    den = dr * dr + di * di
    tr = (ar * dr + ai * di) / den
    ti = (ai * dr - ar * di) / den
    tr += 0.5 * wsr
    ti += 0.5 * wsi
    # k = 1 term: (1/12) s w^(-s-1)
    inv_w = 1.0 / w
    pr = (sr * wsr - si * wsi) * inv_w / 12.0
    pi_ = (sr * wsi + si * wsr) * inv_w / 12.0
    prev = 1e308
    scale = math.hypot(tr, ti) + mag
    for k in range(1, K_MAX):
        tr += pr
        ti += pi_
        size = math.hypot(pr, pi_)
        if size < tol * scale:
            break
        if size > prev:  # asymptotic series started to diverge
            break
        prev = size
        # multiply by c_{k+1}/c_k * (s+2k-1)(s+2k) / w^2
        ar = sr + 2 * k - 1.0
        br = sr + 2 * k
        mr = ar * br - si * si
        mi = ar * si + br * si
        f = C_RATIO_NB[k - 1] * inv_w * inv_w
        nr = (pr * mr - pi_ * mi) * f
        ni = (pr * mi + pi_ * mr) * f
        pr = nr
        pi_ = ni
    return tr, ti



@numba.njit(cache=True)
def _em_one(sr, si, chi_re, chi_im, q, m, logs, turns, rsqrt, tol):
    n_max = m * q
    # compensated complex sum of chi(n) n^-s, n = 1..n_max
    acc_r = 0.0
    acc_i = 0.0
    c_r = 0.0
    c_i = 0.0
    half = sr == 0.5
    for n in range(1, n_max + 1):
        a = n % q
        xr = chi_re[a]
        xi = chi_im[a]
        if xr == 0.0 and xi == 0.0:
            continue
        if half:
            amp = rsqrt[n]
        else:
            amp = math.exp(-sr * logs[n])
        ph = si * turns[n]
        ph = ph - math.floor(ph)
        ang = TWO_PI * ph
        cr = math.cos(ang)
        ci = -math.sin(ang)
        vr = amp * (xr * cr - xi * ci)
        vi = amp * (xr * ci + xi * cr)
        y = vr - c_r
        tt = acc_r + y
        c_r = (tt - acc_r) - y
        acc_r = tt
        y = vi - c_i
        tt = acc_i + y
        c_i = (tt - acc_i) - y
        acc_i = tt
    # tails
    lq = math.log(q)
    qmag = math.exp(-sr * lq)
    qph = -si * lq
    qr = qmag * math.cos(qph)
    qi = qmag * math.sin(qph)
    tail_r = 0.0
    tail_i = 0.0
    for a in range(1, q + 1):
        xr = chi_re[a % q]
        xi = chi_im[a % q]
        if xr == 0.0 and xi == 0.0:
            continue
        hr, hi = _hurwitz_tail(sr, si, m + a / q, tol)
        tail_r += xr * hr - xi * hi
        tail_i += xr * hi + xi * hr
    out_r = acc_r + (qr * tail_r - qi * tail_i)
    out_i = acc_i + (qr * tail_i + qi * tail_r)
    return out_r, out_i


@numba.njit(cache=True, parallel=True)
def _em_batch(sr_arr, si_arr, chi_re, chi_im, q, m_arr, logs, turns, rsqrt, tol, out_r, out_i):
    for i in numba.prange(sr_arr.size):
        r, im = _em_one(sr_arr[i], si_arr[i], chi_re, chi_im, q, m_arr[i], logs, turns, rsqrt, tol)
        out_r[i] = r
        out_i[i] = im


def em_eval(chi: np.ndarray, sigma, t, tol: float = 1e-17, rho_scale: float = 1.0) -> np.ndarray:
    """F(sigma + i t) for the q-periodic coefficients ``chi`` (length q).

    ``sigma`` and ``t`` broadcast against each other.  ``rho_scale`` > 1
    moves the cut point further out (used for self-consistency checks).
    """
    chi = np.asarray(chi, dtype=complex)
    q = chi.size
    sig, tt = np.broadcast_arrays(np.asarray(sigma, dtype=float), np.asarray(t, dtype=float))
    shape = sig.shape
    sig = np.ascontiguousarray(sig.ravel())
    tt = np.ascontiguousarray(tt.ravel())
    m = np.array([int(math.ceil(cut_periods(s_, t_, q) * rho_scale)) for s_, t_ in zip(sig, tt)],
                 dtype=np.int64)
    if m.size == 0:
        return np.zeros(shape, dtype=complex)
    logs, turns, rsqrt = log_tables(int(m.max()) * q + 1)
    out_r = np.empty(sig.size)
    out_i = np.empty(sig.size)
    _em_batch(sig, tt, np.ascontiguousarray(chi.real), np.ascontiguousarray(chi.imag), q, m,
              logs, turns, rsqrt, tol, out_r, out_i)
    return (out_r + 1j * out_i).reshape(shape)


@numba.njit(cache=True)
def _partial_one(sr, si, chi_re, chi_im, q, n_max, logs, turns):
    acc_r = 0.0
    acc_i = 0.0
    for n in range(1, n_max + 1):
        a = n % q
        xr = chi_re[a]
        xi = chi_im[a]
        if xr == 0.0 and xi == 0.0:
            continue
        amp = math.exp(-sr * logs[n])
        ph = si * turns[n]
        ph = ph - math.floor(ph)
        ang = TWO_PI * ph
        cr = math.cos(ang)
        ci = -math.sin(ang)
        acc_r += amp * (xr * cr - xi * ci)
        acc_i += amp * (xr * ci + xi * cr)
    return acc_r, acc_i


@numba.njit(cache=True, parallel=True)
def _partial_batch(sr_arr, si_arr, chi_re, chi_im, q, n_arr, logs, turns, out_r, out_i):
    for i in numba.prange(sr_arr.size):
        r, im = _partial_one(sr_arr[i], si_arr[i], chi_re, chi_im, q, n_arr[i], logs, turns)
        out_r[i] = r
        out_i[i] = im


def partial_sums(chi: np.ndarray, sigma, t, n_max) -> np.ndarray:
    """sum_{n <= n_max} chi(n) n^-(sigma + i t), broadcasting all arguments."""
    chi = np.asarray(chi, dtype=complex)
    sig, tt, nn = np.broadcast_arrays(np.asarray(sigma, dtype=float), np.asarray(t, dtype=float),
                                      np.asarray(n_max, dtype=np.int64))
    shape = sig.shape
    sig = np.ascontiguousarray(sig.ravel())
    tt = np.ascontiguousarray(tt.ravel())
    nn = np.ascontiguousarray(nn.ravel())
    if sig.size == 0:
        return np.zeros(shape, dtype=complex)
    logs, turns, _ = log_tables(int(max(nn.max(), 1)) + 1)
    out_r = np.empty(sig.size)
    out_i = np.empty(sig.size)
    _partial_batch(sig, tt, np.ascontiguousarray(chi.real), np.ascontiguousarray(chi.imag),
                   chi.size, nn, logs, turns, out_r, out_i)
    return (out_r + 1j * out_i).reshape(shape)
