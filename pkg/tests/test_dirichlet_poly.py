import math

import numpy as np
import pytest
from scipy import integrate

from lvaluelab.dirichlet_poly import (DEFAULT_SMOOTHING, window_branches, K_local, K_local_many, SmoothingChoice,
                                      bump, bump_cdf, diagnostic_wsum, dir_poly, ell_tail_bound,
                                      sigma_F, smoothed_dir_poly, tau_pair, weight_v, window_w_X)
from lvaluelab.lfunc_registry import SpecError, make_tuple
from lvaluelab.primes import prime_powers_up_to, primes_up_to

# sum_l 1/(l^2 2^l) + sum_l 1/(l^2 3^l), frozen from a 30-digit mpmath series
DILOG_2_3 = 0.948453756442075994


def test_dir_poly_examples(zeta):
    assert dir_poly(zeta, 0.5, 1.9) == 0
    assert dir_poly(zeta, 0.0, 2) == pytest.approx(1.0, abs=1e-15)
    want = 1 / math.sqrt(2) + 1 / math.sqrt(3) + 0.5 / 2
    assert abs(dir_poly(zeta, 0.5, 4) - want) < 1e-14


def test_dir_poly_vectorised(chi4, rng):
    s = 0.5 + 1j * rng.uniform(0, 100, 5)
    vec = dir_poly(chi4, s, 500)
    n, p, ell = prime_powers_up_to(500)
    for i, si in enumerate(s):
        direct = sum(chi4.chi(int(pp)) ** int(l) / int(l) * float(nn) ** (-si)
                     for nn, pp, l in zip(n, p, ell))
        assert abs(vec[i] - direct) < 1e-12


def test_sigma_examples(zeta):
    assert sigma_F(zeta, 1.5) == 0
    assert abs(sigma_F(zeta, 3) - math.sqrt(0.5 * DILOG_2_3)) < 1e-14
    v = sigma_F(zeta, 1e6) ** 2 - 0.5 * math.log(math.log(1e6))
    assert -0.5 < v < 1.5


def test_sigma_matches_prime_power_enumeration(zeta, chi4):
    for spec in (zeta, chi4):
        X = 1e4
        # every p <= X and every l with p^l < 1e30, enumerated by hand
        total = 0.0
        for pp in primes_up_to(X):
            c = abs(spec.chi(int(pp))) ** 2
            l = 1
            while float(pp) ** l < 1e30:
                total += c / (l * l * float(pp) ** l)
                l += 1
        assert abs(sigma_F(spec, X) ** 2 - 0.5 * total) < 1e-12


def test_ell_tail_bound_small():
    for p in (2, 3, 101, 10007, 1000003):
        assert ell_tail_bound(p) < 1e-18 / p


def test_tau_examples(zeta, chi4):
    assert abs(tau_pair(zeta, zeta, 0.3, 0.3, 1e3) - sigma_F(zeta, 1e3) ** 2) < 1e-12
    assert abs(tau_pair(zeta, zeta, 0.0, math.pi / 2, 1e3)) < 1e-14
    assert abs(tau_pair(zeta, chi4, 0.0, 0.0, 1e5)) < 1.0


def test_K_local_examples(zeta_tuple, pair_tuple):
    assert K_local(pair_tuple, 7, np.zeros(2)) == 0
    for p in (2, 3, 97):
        series = sum(1 / (l * l * p**l) for l in range(1, 80))
        assert abs(K_local(zeta_tuple, p, np.array([1.7])) - 1.7**2 * series) < 1e-14
    z = np.array([0.4, -1.1])
    zr = z[::-1]
    swapped = make_tuple(pair_tuple.specs[::-1], pair_tuple.thetas[::-1])
    assert abs(K_local(pair_tuple, 13, z) - K_local(swapped, 13, zr)) < 1e-15


def test_K_sigma_tau_identity(rng, zeta, chi4):
    for specs, thetas in (([zeta, chi4], [0.0, 0.0]), ([zeta, zeta], [0.0, math.pi / 2]),
                          ([zeta, chi4], [0.3, -1.0])):
        tup = make_tuple(specs, thetas)
        for X in (100.0, 1e4):
            x = rng.normal(size=2)
            lhs = float(np.sum(K_local_many(tup, primes_up_to(X), x)).real)
            rhs = 2 * sum(x[j] ** 2 * sigma_F(specs[j], X) ** 2 for j in range(2)) \
                + 4 * x[0] * x[1] * tau_pair(specs[0], specs[1], thetas[0], thetas[1], X)
            assert abs(lhs - rhs) < 1e-10 * abs(rhs)


def test_bump_and_cdf():
    assert abs(integrate.quad(bump, 0, 1)[0] - 1) < 1e-12
    y = np.linspace(0, 1, 11)
    ref = [integrate.quad(bump, 0, v)[0] for v in y]
    assert np.max(np.abs(bump_cdf(y) - ref)) < 1e-13
    with pytest.raises(ValueError):
        SmoothingChoice(f=lambda x: 2 * bump(x))
    with pytest.raises(ValueError):
        SmoothingChoice(H=0.5)


def test_weight_v():
    s = DEFAULT_SMOOTHING
    assert weight_v(1.0, s) == 1.0
    assert weight_v(math.e, s) == 1.0
    assert weight_v(math.exp(2.0), s) == 0.0
    for H in (1.0, 3.0):
        sm = SmoothingChoice(H=H)
        assert abs(weight_v(math.exp(1 + 1 / H), sm)) < 1e-13
    half = integrate.quad(bump, 0.5, 1)[0]
    assert abs(weight_v(math.exp(1.5), s) - half) < 1e-14
    grid = np.linspace(0.1, 12, 10_000)
    v = weight_v(grid, s)
    assert np.all(np.diff(v) <= 0) and v.min() >= 0 and v.max() <= 1
    # generic f without closed-form antiderivative goes through quadrature
    sm = SmoothingChoice(cdf=None)
    assert abs(weight_v(math.exp(1.3), sm) - weight_v(math.exp(1.3), s)) < 1e-12


def test_smoothed_poly(zeta, chi4):
    X = 100.0
    s = 0.5 + 21.3j
    n, p, ell = prime_powers_up_to(X ** 2)
    b = zeta.coeff_b(p, ell)
    # weights exactly 1 below X and 0 above X^(1+1/H)
    w = weight_v(np.exp(np.log(n) / math.log(X)))
    assert np.all(w[n <= X] == 1.0)
    assert np.all(w[n >= X ** 2] == 0.0)
    direct = np.sum(b * w * n.astype(float) ** (-s))
    assert abs(smoothed_dir_poly(zeta, s, X) - direct) < 1e-12
    # H large: close to the sharp sum, within the mass of the taper band
    sm = SmoothingChoice(H=50.0)
    sharp = dir_poly(chi4, s, X)
    nb, pb, lb = prime_powers_up_to(X ** (1 + 1 / 50))
    band = np.sum(np.abs(chi4.coeff_b(pb, lb)[nb > X]) * nb[nb > X].astype(float) ** -0.5)
    assert abs(smoothed_dir_poly(chi4, s, X, sm) - sharp) <= band + 1e-12


def test_window():
    X = 10.0
    assert window_w_X(1.0, X) == 1.0 and window_w_X(X, X) == 1.0
    a = (math.log(X**3 / X**2) ** 2 - 2 * math.log(X**2 / X**2) ** 2) / (2 * math.log(X) ** 2)
    b = math.log(X**3 / X**2) ** 2 / (2 * math.log(X) ** 2)
    assert a == pytest.approx(0.5) and b == pytest.approx(0.5)
    assert window_w_X(X**2, X) == pytest.approx(0.5, abs=1e-14)
    assert abs(window_w_X(X**3, X)) < 1e-14
    # continuity at y = X: middle branch gives (9 - 2*4)/2 / ... = 1
    lx = math.log(X)
    mid_at_X = ((3 * lx - lx) ** 2 - 2 * (2 * lx - lx) ** 2) / (2 * lx**2)
    assert mid_at_X == pytest.approx(1.0, abs=1e-14)
    assert window_w_X(X * (1 + 1e-12), X) == pytest.approx(1.0, abs=1e-10)
    one, mid, last = window_branches(np.array([1.0, 2.0]))
    assert one[0] == mid[0] == 1.0 and mid[1] == last[1] == 0.5
    with pytest.raises(ValueError):
        window_w_X(0.5, X)
    with pytest.raises(ValueError):
        window_w_X(X**3 * 1.01, X)


def test_diagnostic_wsum(zeta, chi4):
    X = 3.0
    sigma = 0.5 + 4 / math.log(X)
    n, p, ell = prime_powers_up_to(27)
    # Lambda(n) = log p at n = p^l
    direct = sum(math.log(pp) * window_w_X(float(nn), X) * nn ** -sigma for nn, pp in zip(n, p))
    assert abs(diagnostic_wsum(zeta, 0.0, X) - direct) < 1e-12
    assert list(n) == [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27]
    t = 17.5
    assert abs(diagnostic_wsum(zeta, -t, 50.0) - np.conj(diagnostic_wsum(zeta, t, 50.0))) < 1e-12
    with pytest.raises(SpecError):
        diagnostic_wsum(chi4, 1.0, 10.0)
