from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from alphawilton.alpha_cf import unfolded_expansion
from alphawilton.exact import Mat2
from alphawilton.matching import (FLIP, SHIFT, exceptional_check_bounded, exponents_from_pseudocenter,
                                  find_matching_exponents, local_form, pseudocenter_check, t_sequence, u_sequence)

F = Fraction


@pytest.mark.parametrize("r,nm", [(F(2, 5), (2, 2)), (F(1, 3), (1, 2)), (F(3, 8), (2, 3)), (F(2, 3), (1, 0)),
                                  (F(1, 2), (1, 1))])
def test_spot_exponents(r, nm):
    d = find_matching_exponents(r)
    assert (d.n, d.m) == nm and d.verified
    assert d.M_plus == SHIFT @ d.M_minus @ FLIP


def test_json_shape():
    assert find_matching_exponents(F(2, 5)).as_dict() == {"n": 2, "m": 2, "index": 0, "verified": True}


def test_matching_index_examples():
    # (g, 1] has index -1, the intervals around u_m have index +1, (1-g, g) index 0
    for r in (F(2, 3), F(3, 4), F(5, 7)):
        assert find_matching_exponents(r).index == -1
    for m in range(1, 6):
        u = u_sequence(m)
        assert pseudocenter_check(u)
        assert find_matching_exponents(u).index == 1
    for r in (F(1, 2), F(2, 5), F(3, 5), F(5, 12)):
        assert find_matching_exponents(r).index == 0


def test_u_and_t_bracket_one_minus_g():
    one_minus_g = (3 - 5 ** 0.5) / 2
    for m in range(1, 8):
        assert u_sequence(m) < one_minus_g < t_sequence(m)
        assert u_sequence(m) < u_sequence(m + 1) and t_sequence(m + 1) < t_sequence(m)


def test_pseudocenter_characterisation():
    assert pseudocenter_check(F(2, 5))
    assert not pseudocenter_check(F(3, 7))  # 7/3 - 2 = 1/3 < 3/7
    assert exponents_from_pseudocenter(F(3, 8)) == (2, 3)


def test_exceptional_points():
    g = lambda: (mpmath.sqrt(5) - 1) / 2
    assert exceptional_check_bounded(g, 40)
    assert exceptional_check_bounded(lambda: mpmath.sqrt(2) - 1, 40)
    assert not exceptional_check_bounded(F(3, 7), 10)
    assert not exceptional_check_bounded(mpmath.pi - 3, 10)


@settings(max_examples=60, deadline=None)
@given(st.fractions(min_value=F(1, 50), max_value=1, max_denominator=80))
def test_found_exponents_satisfy_consequences(r):
    d = find_matching_exponents(r)
    if not d:
        return
    plus, _ = unfolded_expansion(r, r)
    minus, _ = unfolded_expansion(r - 1, r)
    u, v = plus[d.n], minus[d.m]
    assert u + v + u * v == 0
    assert d.M_plus.d == d.M_minus.d and d.M_plus.b == d.M_minus.b + d.M_minus.d


def _T(y, a):
    inv = 1 / abs(y)
    return inv - (inv + 1 - a).__floor__()


@pytest.mark.parametrize("alpha", [F(2, 5), F(1, 3), F(2, 3), F(3, 8), F(5, 12)])
def test_local_form_transports_orbits(alpha):
    lf = local_form(alpha)
    assert lf.window > 0
    for k in range(1, 30):
        h = lf.window * F(k, 31)
        for x, y, depth in ((alpha - h, alpha - h, lf.depth_left), (alpha + h, alpha + h - 1, lf.depth_right)):
            for _ in range(depth):
                y = _T(y, alpha)
            assert lf.phi_at(x) == y


def test_local_form_phi_for_two_thirds():
    lf = local_form(F(2, 3))
    assert lf.phi_left == Mat2(3, -2, -1, 1)
    assert lf.sign_parity == "odd"


def test_bad_alpha():
    with pytest.raises(Exception):
        find_matching_exponents(F(3, 2))
