"""Exact substrate: rationals, 2x2 integer Moebius matrices, regular continued fractions."""
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

Rational = Fraction


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class _ProjectiveInfinity:
    """The point at infinity of the projective line."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_ProjectiveInfinity, ())


INF = _ProjectiveInfinity()


def as_rational(x) -> Fraction:
    """Parse ``x`` (int, Fraction, float or a ``"p/q"`` string) as an exact rational."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def format_rational(r) -> str:
    r = Fraction(r)
    return f"{r.numerator}/{r.denominator}"


@dataclass(frozen=True)
class Mat2:
    """Integer matrix ``[[a, b], [c, d]]`` acting by ``x -> (a x + b) / (c x + d)``."""

    a: int
    b: int
    c: int
    d: int

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1)

    @classmethod
    def digit(cls, eps, c):
        """The digit matrix ``[[0, eps], [1, c]]``."""
        return cls(0, int(eps), 1, int(c))

    def det(self):
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other):
        return mat_mul(self, other)

    def inverse(self):
        """Integer inverse; only defined for determinant +-1."""
        det = self.det()
        if det not in (1, -1):
            raise DomainError(f"matrix {self} is not unimodular")
        return Mat2(self.d * det, -self.b * det, -self.c * det, self.a * det)

    def __call__(self, x):
        return mobius_apply(self, x)

    def rows(self):
        return [[self.a, self.b], [self.c, self.d]]


def mat_mul(A: Mat2, B: Mat2) -> Mat2:
    return Mat2(A.a * B.a + A.b * B.c, A.a * B.b + A.b * B.d,
                A.c * B.a + A.d * B.c, A.c * B.b + A.d * B.d)


def mobius_apply(M: Mat2, x):
    """Apply ``M`` to an extended real.

    Rational (or int) input stays exact; a vanishing denominator returns
    :data:`INF` rather than raising.
    """
    if x is INF:
        if M.c == 0:
            return INF
        return Fraction(M.a, M.c)
    if isinstance(x, int):
        x = Fraction(x)
    den = M.c * x + M.d
    if den == 0:
        return INF
    return (M.a * x + M.b) / den


@dataclass(frozen=True)
class RcfExpansion:
    """Regular continued fraction ``[0; a_1, ..., a_l]`` of a number in (0, 1)."""

    digits: Tuple[int, ...]

    @property
    def parity(self):
        return "even" if len(self.digits) % 2 == 0 else "odd"

    def value(self) -> Fraction:
        return cf_value(self.digits)


def cf_value(digits) -> Fraction:
    """Evaluate ``[0; a_1, ..., a_l]`` exactly."""
    r = Fraction(0)
    for a in reversed(digits):
        r = 1 / (a + r)
    return r


def rcf_digits(r) -> Tuple[int, ...]:
    """Canonical digits of ``r`` in (0, 1): Euclid's algorithm, last digit >= 2."""
    r = as_rational(r)
    if not 0 < r < 1:
        raise DomainError(f"{r} is not in (0, 1)")
    num, den = r.numerator, r.denominator
    out = []
    while num:
        a, rem = divmod(den, num)
        out.append(a)
        den, num = num, rem
    return tuple(out)


def rcf_expansions(r) -> Tuple[RcfExpansion, RcfExpansion]:
    """Both regular expansions of a rational in (0, 1), returned as ``(even, odd)``."""
    short = rcf_digits(r)
    long_ = short[:-1] + (short[-1] - 1, 1)
    first, second = RcfExpansion(short), RcfExpansion(long_)
    if first.parity == "even":
        return first, second
    return second, first
