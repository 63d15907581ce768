"""Matching for rational alpha: exponents, pseudocenters and the local form near alpha."""
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath

from .alpha_cf import AlphaParam, digit_matrices, unfolded_expansion
from .exact import DomainError, Mat2, as_rational, cf_value, mobius_apply, rcf_expansions

SHIFT = Mat2(1, 1, 0, 1)
FLIP = Mat2(-1, 0, 1, 1)  # y -> -y / (y + 1), an involution


class MatchingError(DomainError):
    """No matching data is available for the requested parameter."""


@dataclass(frozen=True)
class NoMatch:
    alpha: Fraction
    reason: str

    def __bool__(self):
        return False


@dataclass(frozen=True)
class MatchingData:
    alpha: Fraction
    n: int
    m: int
    verified: bool
    M_plus: Mat2
    M_minus: Mat2

    @property
    def index(self):
        return self.m - self.n

    def as_dict(self):
        return {"n": self.n, "m": self.m, "index": self.index, "verified": self.verified}


@dataclass
class _Branches:
    plus: list
    minus: list
    plus_digits: list
    minus_digits: list
    plus_mats: list
    minus_mats: list


def _branches(alpha):
    plus, pd = unfolded_expansion(alpha, alpha)
    minus, md = unfolded_expansion(alpha - 1, alpha)
    return _Branches(plus, minus, pd, md, digit_matrices(pd), digit_matrices(md))


def _rational_alpha(alpha):
    alpha = as_rational(alpha.value if isinstance(alpha, AlphaParam) else alpha)
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha={alpha} is not in (0, 1]")
    return alpha


def _consequences_hold(br, n, m):
    """Column relation and ``1/T^n(alpha) + 1/T^m(alpha-1) = -1`` (as ``u + v + uv = 0``)."""
    P, M = br.plus_mats[n], br.minus_mats[m]
    if not (P.d == M.d and P.b == M.b + M.d):
        return False
    u, v = br.plus[n], br.minus[m]
    if u + v + u * v != 0:
        return False
    # the next iterates coincide (both sides end at 0 when u = v = 0)
    nxt_p = br.plus[n + 1] if n + 1 < len(br.plus) else 0
    nxt_m = br.minus[m + 1] if m + 1 < len(br.minus) else 0
    return nxt_p == nxt_m


def find_matching_exponents(alpha):
    """Smallest ``(n, m)``, by ``n + m`` then ``n``, with ``M(alpha, n) = U M(alpha-1, m) V``."""
    alpha = _rational_alpha(alpha)
    br = _branches(alpha)
    N, Mx = len(br.plus_mats) - 1, len(br.minus_mats) - 1
    for total in range(N + Mx + 1):
        for n in range(max(0, total - Mx), min(N, total) + 1):
            m = total - n
            if br.plus_mats[n] == SHIFT @ br.minus_mats[m] @ FLIP:
                return MatchingData(alpha, n, m, _consequences_hold(br, n, m),
                                    br.plus_mats[n], br.minus_mats[m])
    return NoMatch(alpha, "both orbits reach 0 without the matrix identity holding")


def exponents_from_pseudocenter(r):
    """Exponents read off the even-length expansion: ``n`` sums even places, ``m`` odd ones."""
    even, _ = rcf_expansions(r)
    digits = even.digits
    return sum(digits[1::2]), sum(digits[0::2])


def _gauss_orbit(r):
    num, den = r.numerator, r.denominator
    while num:
        den, num = num, den % num
        yield Fraction(num, den)


def pseudocenter_check(r):
    """True iff no Gauss iterate of ``r`` lands in ``(0, r)``."""
    r = as_rational(r)
    if not 0 < r < 1:
        raise DomainError(f"{r} is not in (0, 1)")
    return all(not 0 < y < r for y in _gauss_orbit(r))


def u_sequence(m):
    """``[0; 2, 1^(2m-1)]``; increases to ``1 - g``."""
    if m < 1:
        raise DomainError("u_m needs m >= 1")
    return cf_value((2,) + (1,) * (2 * m - 1))


def t_sequence(m):
    """``[0; 2, 1^(2m)]``; decreases to ``1 - g``."""
    if m < 0:
        raise DomainError("t_m needs m >= 0")
    return cf_value((2,) + (1,) * (2 * m))


def exceptional_check_bounded(x, K, prec=None):
    """Bounded certificate that ``T_1^k(x) >= x`` for ``1 <= k <= K``.

    Rationals are checked exactly.  Otherwise ``x`` is a real, or a zero
    argument callable returning it at the current mpmath precision; the orbit
    runs with ``64 + 4K`` bits and ties within ``2^-32`` count as equal.
    """
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        if not 0 < x < 1:
            raise DomainError(f"{x} is not in (0, 1)")
        for k, y in enumerate(_gauss_orbit(x), start=1):
            if k > K:
                break
            if y < x:
                return False
        return True
    bits = prec or 64 + 4 * K
    with mpmath.workprec(bits):
        x0 = mpmath.mpf(x() if callable(x) else x)
        if not 0 < x0 < 1:
            raise DomainError(f"{x0} is not in (0, 1)")
        tie = mpmath.ldexp(1, -32)
        y = x0
        for _ in range(K):
            if y == 0:
                return False
            y = 1 / y
            y -= mpmath.floor(y)
            if y < x0 - tie:
                return False
    return True


def _cylinder(digits, alpha):
    """Closed hull of the points in ``[alpha-1, alpha]`` whose first digits are ``digits``."""
    lo, hi = alpha - 1, alpha
    for eps, c in reversed(digits):
        ends = sorted((Fraction(eps) / (c + lo), Fraction(eps) / (c + hi)))
        lo, hi = max(ends[0], alpha - 1), min(ends[1], alpha)
        if lo > hi:
            return None
    return lo, hi


@dataclass
class LocalForm:
    """Transport of the unfolded Wilton function across ``alpha``.

    On ``(alpha - window, alpha + window)``::

        W(x) = h(x) + weight(x) * W(phi(x))

    with ``h`` bounded.  ``phi_left``/``phi_right`` act on ``x`` and ``x - 1``
    respectively.  When the orbit of ``alpha`` reaches 0 at step ``n`` the
    ``n + 1`` matrix does not exist; the transport then stops at depth ``n``
    on the left and ``m`` on the right and ``phi_right = FLIP . phi_left``.
    """

    alpha: Fraction
    matching: MatchingData
    phi: Optional[Mat2]
    phi_left: Mat2
    phi_right: Mat2
    depth_left: int
    depth_right: int
    window: Fraction
    b_coeffs: tuple
    degenerate: bool

    @property
    def sign_parity(self):
        return "even" if (self.matching.n - self.matching.m) % 2 == 0 else "odd"

    def b(self, x):
        p, q = self.b_coeffs
        return abs(q * x - p)

    def phi_at(self, x):
        if x < self.alpha:
            return mobius_apply(self.phi_left, x)
        return mobius_apply(self.phi_right, x - 1)

    def weight(self, x):
        """Signed coefficient of ``W(phi(x))``; exact for rational ``x``."""
        if x < self.alpha:
            d, y = self.depth_left, x
        else:
            d, y = self.depth_right, x - 1
        return (-1) ** d * _beta_tilde(y, self.alpha, d - 1)


def _beta_tilde(y, alpha, k):
    """``prod_{i<=k} |T^i(y)|`` with ``beta_{-1} = 1``."""
    out = 1
    for i in range(k + 1):
        out *= abs(y)
        if i < k:
            inv = 1 / abs(y)
            y = inv - _floor(inv + 1 - alpha)
    return out


def _floor(v):
    if isinstance(v, mpmath.mpf):
        return int(mpmath.floor(v))
    return v.__floor__()


def local_form(alpha, data=None):
    alpha = _rational_alpha(alpha)
    data = data or find_matching_exponents(alpha)
    if not data:
        raise MatchingError(f"alpha={alpha} has no matching data: {data.reason}")
    n, m = data.n, data.m
    br = _branches(alpha)
    degenerate = br.plus[n] == 0
    if degenerate:
        dl, dr = n, m
    else:
        dl, dr = n + 1, m + 1
    left, right = br.plus_mats[dl], br.minus_mats[dr]
    phi_left, phi_right = left.inverse(), right.inverse()
    cyl_l = _cylinder(br.plus_digits[:max(dl, n)], alpha)
    cyl_r = _cylinder(br.minus_digits[:max(dr, m)], alpha)
    if cyl_l is None or cyl_r is None or cyl_l[1] != alpha or cyl_r[0] != alpha - 1:
        raise MatchingError(f"alpha={alpha}: digit cylinders do not reach alpha")
    window = min(cyl_l[1] - cyl_l[0], cyl_r[1] - cyl_r[0]) / 2
    if window <= 0:
        raise MatchingError(f"alpha={alpha}: empty one-sided cylinder")
    P = data.M_plus
    return LocalForm(alpha, data, None if degenerate else phi_left, phi_left, phi_right,
                     dl, dr, window, (P.b, P.d), degenerate)
