import math

import numpy as np
import pytest

from lvaluelab.lfunc_registry import (SpecError, character_table, conductor, load_tuple_config,
                                      make_dirichlet, make_tuple, make_zeta, number_of_characters,
                                      parse_tuple_arg, primitive_indices)
from lvaluelab.primes import prime_powers_up_to, primes_up_to


def test_zeta_constants(zeta):
    assert zeta.q == 1 and zeta.n_F == 1 and zeta.pole_order == 1 and zeta.vartheta_F == 0


def test_zeta_coefficients(zeta):
    assert zeta.coeff_b(2, 1) == 1
    assert zeta.coeff_b(2, 3) == pytest.approx(1 / 3, abs=1e-15)
    assert zeta.coeff_b(5, 2) == pytest.approx(0.5, abs=1e-15)
    assert zeta.von_mangoldt(8) == pytest.approx(math.log(2), abs=1e-14)
    assert zeta.von_mangoldt(12) == 0


def test_coeff_rejects_composite(zeta):
    with pytest.raises(SpecError):
        zeta.coeff_b(4, 1)


def test_chi4_table(chi4):
    # brute force: the non-principal character mod 4 is n -> (-1)^((n-1)/2) on odd n
    for n in range(1, 50):
        expected = 0 if n % 2 == 0 else (-1) ** ((n - 1) // 2)
        assert chi4.chi(n) == pytest.approx(expected, abs=1e-12)
    assert chi4.chi(3) == pytest.approx(-1)
    assert chi4.chi(2) == 0
    assert chi4.coeff_b(3, 2) == pytest.approx(0.5, abs=1e-15)
    assert chi4.coeff_b(2, 1) == 0
    assert chi4.pole_order == 0 and chi4.q == 4


def test_chi3_orthogonality():
    chi = make_dirichlet(3, 1)
    assert abs(sum(chi.chi(n) for n in range(1, 4))) < 1e-12


@pytest.mark.parametrize("q", [3, 4, 5, 7, 8, 9, 12, 15, 16, 21, 25, 27])
def test_character_group_structure(q):
    for idx in range(number_of_characters(q)):
        vals = np.array(character_table(q, idx))
        units = [n for n in range(q) if math.gcd(n, q) == 1]
        for m in range(q):
            for n in range(q):
                assert abs(vals[(m * n) % q] - vals[m] * vals[n]) < 1e-12
        nz = vals[np.abs(vals) > 0]
        assert np.allclose(np.abs(nz), 1, atol=1e-12)
        assert all(abs(vals[n]) == 0 for n in range(q) if math.gcd(n, q) > 1)
        if idx > 0:
            assert abs(vals.sum()) < 1e-12
        assert len(units) == nz.size


def test_primitive_and_rejections():
    assert primitive_indices(4) == [1]
    assert conductor(character_table(4, 1)) == 4
    with pytest.raises(SpecError):
        make_dirichlet(4, 0)
    with pytest.raises(SpecError):
        make_dirichlet(2, 1)
    # mod 12 every character induced from mod 3 or mod 4 is not primitive
    for idx in range(1, number_of_characters(12)):
        if conductor(character_table(12, idx)) != 12:
            with pytest.raises(SpecError):
                make_dirichlet(12, idx)


def test_root_numbers():
    # real primitive characters have root number 1
    for q, idx in ((3, 1), (4, 1), (5, 2)):
        assert abs(make_dirichlet(q, idx).root_number() - 1) < 1e-12
    for q in (5, 7, 11):
        for idx in primitive_indices(q):
            assert abs(abs(make_dirichlet(q, idx).root_number()) - 1) < 1e-12


def test_coefficient_bound_all_specs():
    n, p, ell = prime_powers_up_to(1e4)
    for spec in (make_zeta(), make_dirichlet(4, 1), make_dirichlet(5, 1), make_dirichlet(7, 2)):
        assert np.all(np.abs(spec.coeff_b(p, ell)) <= 1 / ell + 1e-15)


def test_tuple_examples(zeta, chi4):
    t = make_tuple([zeta, zeta], [0.0, math.pi / 2])
    assert t.h_F == 2 and t.alpha_F == 4
    with pytest.raises(SpecError, match="components 0 and 1"):
        make_tuple([zeta, zeta], [0.0, 0.0])
    t2 = make_tuple([zeta, chi4], [0.0, 0.0])
    assert t2.h_F == 2
    with pytest.raises(SpecError):
        make_tuple([zeta, zeta, zeta], [0.0, math.pi / 2, math.pi])
    # pi/2 mod pi: 3 pi / 2 also accepted
    make_tuple([zeta, zeta], [0.0, 1.5 * math.pi])


def test_mertens_band():
    ps = primes_up_to(1e7).astype(float)
    csum = np.cumsum(1.0 / ps)
    for x in (1e3, 1e4, 1e5, 1e6, 1e7):
        k = np.searchsorted(ps, x, side="right") - 1
        assert abs(csum[k] - math.log(math.log(x))) < 0.5


def test_cross_orthogonality(chi4):
    ps = primes_up_to(1e7)
    partial = np.cumsum(np.real(chi4.chi(ps)) / ps.astype(float))
    assert np.max(np.abs(partial)) < 1.0


def test_tuple_loading(tmp_path, zeta, chi4):
    p = tmp_path / "t.json"
    p.write_text('[{"kind": "zeta", "theta": 0}, {"kind": "dirichlet", "q": 4, "index": 1}]')
    t = load_tuple_config(p)
    assert t.specs == (zeta, chi4)
    y = tmp_path / "t.yaml"
    y.write_text("tuple:\n  - {kind: zeta, theta: 0}\n  - {kind: zeta, theta: 1.5707963267948966}\n")
    assert load_tuple_config(y).r == 2
    assert parse_tuple_arg("zeta@0,chi:4:1@0").specs == (zeta, chi4)
    with pytest.raises(SpecError):
        parse_tuple_arg("gamma")
