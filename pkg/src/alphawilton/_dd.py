"""Double-double arithmetic.

A value is carried as an unevaluated sum ``hi + lo`` of two float64 numbers
with ``|lo| <= ulp(hi)/2``, giving roughly 106 significand bits.  Every helper
works elementwise on numpy arrays and on scalars inside njit code.
"""
from fractions import Fraction

import numpy as np

from ._accel import jitable

DD_BITS = 106

_SPLITTER = 134217729.0  # 2**27 + 1


@jitable
def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@jitable
def quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


@jitable
def split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


@jitable
def two_prod(a, b):
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@jitable
def dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    e = e + t
    s, e = quick_two_sum(s, e)
    e = e + f
    return quick_two_sum(s, e)


@jitable
def dd_div(ah, al, bh, bl):
    q1 = ah / bh
    p1, p2 = two_prod(q1, bh)
    s, e = two_sum(ah, -p1)
    e = e - p2 + al - q1 * bl
    q2 = (s + e) / bh
    return quick_two_sum(q1, q2)


@jitable
def dd_floor(h, l):
    # integer-valued hi: the sign of lo decides
    f = np.floor(h)
    return f + (f == h) * np.floor(l)


@jitable
def dd_abs(h, l):
    s = 1.0 - 2.0 * (h < 0.0)
    return s * h, s * l


@jitable
def dd_log(h, l):
    return np.log(h) + l / h


def to_dd(x):
    """Split an exact or high-precision number into a ``(hi, lo)`` pair."""
    if isinstance(x, (int, Fraction)):
        hi = float(x)
        return hi, float(Fraction(x) - Fraction(hi))
    if isinstance(x, (float, np.floating)):
        return float(x), 0.0
    # mpmath mpf or anything else float() understands at higher precision
    import mpmath
    hi = float(x)
    with mpmath.workprec(256):
        return hi, float(mpmath.mpf(x) - hi)


def to_dd_arrays(xs):
    """Vectorised :func:`to_dd`; float arrays pass through with zero tails."""
    arr = np.asarray(xs) if not isinstance(xs, (list, tuple)) else None
    if arr is not None and arr.dtype.kind == "f":
        return arr.astype(np.float64), np.zeros(arr.shape, dtype=np.float64)
    pairs = [to_dd(v) for v in xs]
    hi = np.array([p[0] for p in pairs], dtype=np.float64)
    lo = np.array([p[1] for p in pairs], dtype=np.float64)
    return hi, lo
