import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alphawilton import _kernels as kern
from alphawilton.wilton import (brjuno_eval, brjuno_partial, grid_emit, integral_near_zero, q_series_eval,
                                wilton_condition_diag, wilton_eval, wilton_many, wilton_partial, wilton_unfolded)

G = (math.sqrt(5) - 1) / 2


def g_mp():
    # a float g drifts off the fixed point after ~40 steps; 256 bits keep the
    # double-double orbit on it for the whole evaluation
    with mpmath.workprec(256):
        return (mpmath.sqrt(5) - 1) / 2


def naive_wilton(x, alpha, terms=60, prec=400, brjuno=False):
    """Straight transcription of the series in mpmath, for comparison only."""
    with mpmath.workprec(prec):
        a = mpmath.mpf(alpha)
        abar = max(a, 1 - a)
        y = mpmath.mpf(x)
        y = abs(y - mpmath.floor(y + 1 - abar))
        total, beta = mpmath.mpf(0), mpmath.mpf(1)
        for j in range(terms):
            if y == 0:
                break
            total += (1 if brjuno else (-1) ** j) * beta * -mpmath.log(y)
            beta *= y
            inv = 1 / y
            y = abs(inv - mpmath.floor(inv + 1 - a))
        return float(total)


def test_golden_closed_forms():
    assert wilton_eval(g_mp(), 1, tol=1e-12).value == pytest.approx(-math.log(G) / (1 + G), abs=1e-10)
    assert brjuno_eval(g_mp(), 1, tol=1e-12).value == pytest.approx(-math.log(G) / (1 - G), abs=1e-10)


def test_first_partial_sum_at_g():
    # x_0 = x_1 = g: -log g - g log(1/g)
    assert wilton_partial(G, 1, 1) == pytest.approx(-math.log(G) * (1 - G), rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.001, 0.999), st.sampled_from([0.4, 0.5, 0.55, 0.7, 1.0]))
def test_kernel_matches_naive_series(x, a):
    w = wilton_eval(x, a, tol=1e-12, kmax=400)
    if w.flag:
        return
    assert w.value == pytest.approx(naive_wilton(x, a), abs=1e-10)


def test_symmetry_of_folded_function():
    # W jumps at rationals, so stay on points whose reflection 1 - x is exact in float64
    rng = np.random.default_rng(0)
    for a in (0.4, 0.45):
        for x in rng.uniform(0.25, min(a, 1 - a), 17):
            assert wilton_eval(x, a).value == pytest.approx(wilton_eval(1 - x, a).value, abs=1e-7)


def test_brjuno_partials_nondecreasing():
    x = math.pi - 3
    vals = [brjuno_partial(x, 0.5, K) for K in range(15)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_partial_sum_at_a_rational_endpoint():
    # 1/2 under the Gauss map: x_0 = 1/2, x_1 = 0
    assert wilton_partial(Fraction(1, 2), 1, 0) == pytest.approx(math.log(2))
    assert wilton_partial(Fraction(1, 2), 1, 1) == -math.inf
    assert brjuno_partial(Fraction(1, 2), 1, 1) == math.inf


def test_q_series_at_g():
    # q_n are Fibonacci numbers for g under the Gauss map
    fib = [1, 1]
    while len(fib) < 80:
        fib.append(fib[-1] + fib[-2])
    ref = sum((-1) ** n * math.log(fib[n + 1]) / fib[n] for n in range(78))
    assert q_series_eval(g_mp(), 1, tol=1e-12).value == pytest.approx(ref, abs=1e-10)


def test_mpmath_and_kernel_agree():
    with mpmath.workprec(256):
        x = mpmath.sqrt(2) / 5
        slow = wilton_eval(x, 0.4, tol=1e-12, backend="mpmath").value
        fast = wilton_eval(x, 0.4, tol=1e-12).value
    assert slow == pytest.approx(fast, abs=1e-11)
    # 71/226 -> 13/71 -> 7/13 -> 1/7 -> 0 under A_{2/5}; the value is the finite sum before 0
    ref = (math.log(226 / 71) - 71 / 226 * math.log(71 / 13) + 13 / 226 * math.log(13 / 7)
           - 7 / 226 * math.log(7))
    w = wilton_eval(Fraction(355, 1130), Fraction(2, 5))
    assert w.hit_zero and w.value == pytest.approx(ref, abs=1e-14)


def test_unfolded_is_periodic():
    # multiples of 2^-50 so that x + 4 is exact in float64
    for x in (round(-0.3 * 2 ** 50) / 2 ** 50, round(0.1 * 2 ** 50) / 2 ** 50, round(0.37 * 2 ** 50) / 2 ** 50):
        assert wilton_unfolded(x, 0.4).value == pytest.approx(wilton_unfolded(x + 4, 0.4).value, abs=1e-9)


def test_many_reports_zero_hits():
    v, e, k, f = wilton_many([0.5, 0.3], 1.0, 1e-8, 100)
    assert f[0] == kern.FLAG_ZERO and f[1] == kern.FLAG_OK


def test_grid_rows():
    rows = grid_emit(0.4, 0.0, 1.0, 256)
    xs = [r.x for r in rows]
    assert len(rows) == 256 and xs == sorted(xs)
    assert {r.flag for r in rows} <= {"", "jitter"}
    assert any(r.flag == "jitter" for r in rows)  # 0.5 is a midpoint and dies at once
    assert all(r.err_est <= 1e-8 for r in rows)


def test_integral_near_zero_gauss_prototype():
    # alpha = 1: one-sided behaviour -x log x + x from the right, x log|x| from the left
    x = 1e-3
    right, _ = integral_near_zero(1.0, x, tol=1e-10)
    assert right == pytest.approx(-x * math.log(x) + x, rel=0.01)
    left, _ = integral_near_zero(1.0, -x, tol=1e-10)
    assert left / (-x * math.log(x)) == pytest.approx(1, abs=0.3)


def test_wilton_condition_on_golden_digits():
    d = wilton_condition_diag(G, K=60)
    assert d.verdict == "convergent"
    # a fast-growing digit makes log(q_{j+1})/q_j spike
    spiky = wilton_condition_diag(digits=[1, 1, 1, 10 ** 12, 1, 1], K=5)
    assert 3 in spiky.spikes or 2 in spiky.spikes
