"""Band-limited approximation of box indicators (Beurling-Selberg type).

For one axis,

    1_(c,d)(xi) ~ Im w(xi),   w(xi) = int_0^L G(u/L) e^{2 pi i u xi} f_{c,d}(u) du/u,

with G(u) = 2u/pi + 2(1-u)u / tan(pi u) and
f_{c,d}(u) = (e^{-2 pi i c u} - e^{-2 pi i d u}) / 2.  For a box in r
dimensions the product of the Im w_h is rewritten as an alternating sum of
products of w_h and their conjugates (real part for even r, imaginary part for
odd r); :func:`indicator_W` evaluates that alternating sum for r <= 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .random_model import QuadratureError

#: Gauss-Legendre order used on every panel.
GL_ORDER = 16
#: Absolute agreement required between successive panel doublings.
QUAD_TOL = 1e-9
MAX_PANELS = 1 << 16


@dataclass(frozen=True)
class BoxSpec:
    """Open box (c_1, d_1) x ... x (c_r, d_r) together with a band limit L."""

    c: tuple
    d: tuple
    L: float

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.c))
        d = tuple(float(v) for v in np.atleast_1d(self.d))
        if len(c) != len(d) or not c:
            raise ValueError("c and d must have the same positive length")
        if any(not (a < b) for a, b in zip(c, d)):
            raise ValueError("each interval needs c_h < d_h")
        if not (math.isfinite(self.L) and self.L > 0):
            raise ValueError("band limit L must be finite and positive")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "L", float(self.L))

    @property
    def r(self) -> int:
        return len(self.c)

    def contains(self, xi) -> np.ndarray:
        """Indicator of the open box, for points of shape (..., r)."""
        xi = np.asarray(xi, dtype=float).reshape(-1, self.r)
        inside = np.ones(xi.shape[0], dtype=bool)
        for h in range(self.r):
            inside &= (xi[:, h] > self.c[h]) & (xi[:, h] < self.d[h])
        return inside.astype(float)


def kernel_G(u):
    """G(u) = 2u/pi + 2(1-u)u / tan(pi u) on [0, 1], removable points filled in.

    Written as 2u/pi + 2 cos(pi u) max(u, 1-u) / (pi sinc(min(u, 1-u))), which
    is exact at both endpoints: G(0) = 2/pi, G(1/2) = 1/pi, G(1) = 0.
    """
    scalar = np.ndim(u) == 0
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any((u < 0) | (u > 1)) or np.any(~np.isfinite(u)):
        raise ValueError("kernel_G is defined on [0, 1]")
    near = np.minimum(u, 1.0 - u)
    far = np.maximum(u, 1.0 - u)
    out = 2.0 * u / math.pi + 2.0 * np.cos(math.pi * u) * far / (math.pi * np.sinc(near))
    out = np.where(u == 0.5, 1.0 / math.pi, out)
    return float(out[0]) if scalar else out


def f_cd(c: float, d: float, u):
    """f_{c,d}(u) = (e^{-2 pi i c u} - e^{-2 pi i d u}) / 2."""
    u = np.asarray(u, dtype=float)
    out = 0.5 * (np.exp(-2j * math.pi * c * u) - np.exp(-2j * math.pi * d * u))
    return complex(out) if out.ndim == 0 else out


def f_cd_over_u(c: float, d: float, u):
    """f_{c,d}(u)/u = i pi (d-c) e^{-pi i (c+d) u} sinc((d-c) u); equals i pi (d-c) at 0."""
    u = np.asarray(u, dtype=float)
    return 1j * math.pi * (d - c) * np.exp(-1j * math.pi * (c + d) * u) * np.sinc((d - c) * u)


def _panel_rule(n_panels: int):
    x, w = np.polynomial.legendre.leggauss(GL_ORDER)
    edges = np.linspace(0.0, 1.0, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _axis_integral_fixed(c, d, L, xi, n_panels):
    v, wts = _panel_rule(n_panels)
    base = kernel_G(v) * f_cd_over_u(c, d, L * v) * L * wts
    phase = np.exp(2j * math.pi * L * np.outer(xi, v))
    return phase @ base


def axis_integral(c: float, d: float, L: float, xi, chunk: int = 256) -> np.ndarray:
    """w(xi) = int_0^L G(u/L) e^{2 pi i u xi} f_{c,d}(u) du / u for an array of xi.

    Points are processed in chunks of similar oscillation frequency; within a
    chunk the panel count doubles until two successive rules agree to
    ``QUAD_TOL``.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.size <= chunk:
        return _axis_integral_adaptive(c, d, L, xi)
    order = np.argsort(np.maximum(np.abs(xi - c), np.abs(xi - d)))
    out = np.empty(xi.size, dtype=complex)
    for lo in range(0, xi.size, chunk):
        idx = order[lo:lo + chunk]
        out[idx] = _axis_integral_adaptive(c, d, L, xi[idx])
    return out


def _axis_integral_adaptive(c, d, L, xi):
    if xi.size == 0:
        return np.zeros(0, dtype=complex)
    freq = L * float(np.max(np.maximum(np.abs(xi - c), np.abs(xi - d))))
    n = max(2, int(math.ceil(freq / 2.0)) + 1)
    prev = _axis_integral_fixed(c, d, L, xi, n)
    err = math.inf
    while n < MAX_PANELS:
        n *= 2
        cur = _axis_integral_fixed(c, d, L, xi, n)
        err = float(np.max(np.abs(cur - prev)))
        if err < QUAD_TOL:
            return cur
        prev = cur
    raise QuadratureError(f"axis integral reached only {err:.3g} with {n} panels")


def indicator_W(box: BoxSpec, xi) -> np.ndarray:
    """W_{L,R}(xi) for points of shape (N, r) (or a single point of shape (r,)).

    For r <= 2, with w_h = axis_integral(c_h, d_h, L, xi_h) and eps_j(h) = +1 for h < j,
    -1 otherwise (the -1 integral is conj(w_h)):

        r even:  i^r / 2^(r-1)     sum_j (-1)^(j-1) Re prod_h w_h^{eps_j(h)}
        r odd:   i^(r+1) / 2^(r-1) sum_j (-1)^(j-1) Im prod_h w_h^{eps_j(h)}

    That r-term sum equals prod_h Im w_h only for r = 1, 2 (for r = 3 and
    w_h = i it gives 3/4 instead of 1), so for r >= 3 the product of the
    per-axis imaginary parts is returned directly.
    """
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim <= 1 and xi.size == box.r
    xi = xi.reshape(-1, box.r)
    r = box.r
    if r >= 3:
        out = product_of_axis_im(box, xi)
        return float(out[0]) if single else out
    w = np.stack([axis_integral(box.c[h], box.d[h], box.L, xi[:, h]) for h in range(r)], axis=1)
    total = np.zeros(xi.shape[0])
    for j in range(1, r + 1):
        prod = np.ones(xi.shape[0], dtype=complex)
        for h in range(1, r + 1):
            prod *= w[:, h - 1] if h <= j - 1 else np.conj(w[:, h - 1])
        part = prod.real if r % 2 == 0 else prod.imag
        total += (-1) ** (j - 1) * part
    power = r if r % 2 == 0 else r + 1
    factor = (1j ** power).real / 2 ** (r - 1)
    out = factor * total
    return float(out[0]) if single else out


def product_of_axis_im(box: BoxSpec, xi) -> np.ndarray:
    """prod_h Im w_h(xi_h): the value the alternating sum must reproduce."""
    xi = np.asarray(xi, dtype=float).reshape(-1, box.r)
    out = np.ones(xi.shape[0])
    for h in range(box.r):
        out *= axis_integral(box.c[h], box.d[h], box.L, xi[:, h]).imag
    return out


def sinc2_majorant(box: BoxSpec, xi) -> np.ndarray:
    """sum_h sinc^2(L(xi_h - c_h)) + sinc^2(L(xi_h - d_h)), sinc(x) = sin(pi x)/(pi x)."""
    xi = np.asarray(xi, dtype=float).reshape(-1, box.r)
    out = np.zeros(xi.shape[0])
    for h in range(box.r):
        out += np.sinc(box.L * (xi[:, h] - box.c[h])) ** 2
        out += np.sinc(box.L * (xi[:, h] - box.d[h])) ** 2
    return out


def pointwise_error(box: BoxSpec, xi) -> np.ndarray:
    """|1_R(xi) - W_{L,R}(xi)|."""
    return np.abs(box.contains(xi) - indicator_W(box, np.asarray(xi).reshape(-1, box.r)))


def fit_constant(box: BoxSpec, xi, floor: float = 1e-12) -> float:
    """Smallest C with |1_R - W| <= C * majorant on the given points."""
    err = pointwise_error(box, xi)
    maj = sinc2_majorant(box, xi)
    keep = maj > floor
    if not keep.any():
        return 0.0
    return float(np.max(err[keep] / maj[keep]))


def l1_error(c: float, d: float, L: float, margin: float = 10.0,
             points_per_unit: int = 200) -> float:
    """int |1_(c,d)(xi) - W_L(xi)| dxi over [c - margin, d + margin] (r = 1).

    The range is split at c and d so the jump never falls inside a panel;
    each piece uses composite Simpson on a grid resolving the 1/L oscillation.
    """
    box = BoxSpec((c,), (d,), L)
    total = 0.0
    for lo, hi in ((c - margin, c), (c, d), (d, d + margin)):
        n = int(math.ceil((hi - lo) * max(points_per_unit, 20 * L)))
        n += n % 2
        grid = np.linspace(lo, hi, n + 1)
        inside = 1.0 if lo == c and hi == d else 0.0
        vals = np.abs(inside - indicator_W(box, grid[:, None]))
        h = (hi - lo) / n
        total += h / 3 * (vals[0] + vals[-1] + 4 * vals[1:-1:2].sum() + 2 * vals[2:-1:2].sum())
    return float(total)


def reflect(box: BoxSpec, xi: Sequence[float]) -> np.ndarray:
    """Mirror points through the box centre: xi_h -> c_h + d_h - xi_h."""
    xi = np.asarray(xi, dtype=float).reshape(-1, box.r)
    return np.asarray(box.c) + np.asarray(box.d) - xi
