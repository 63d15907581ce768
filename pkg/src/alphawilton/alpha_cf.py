"""Folded (A_alpha) and unfolded (T_alpha) alpha-continued-fraction dynamics.

Exact mode runs on :class:`fractions.Fraction` values, float mode on mpmath
numbers with a configurable number of significand bits (default 128, or the
``WILTON_PRECISION_BITS`` environment variable).
"""
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

import mpmath

from .exact import DomainError, Mat2, as_rational

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
SQRT2_MINUS_1 = math.sqrt(2.0) - 1.0

DEFAULT_PRECISION_BITS = 128


class OrbitTerminated(Exception):
    """Raised when a step is requested from the fixed point 0."""


def precision_bits(prec=None):
    """Significand bits for float mode: explicit value, environment, or 128."""
    if prec is not None:
        return int(prec)
    env = os.environ.get("WILTON_PRECISION_BITS")
    if env:
        return int(env)
    return DEFAULT_PRECISION_BITS


def _is_exact(v):
    return isinstance(v, (int, Fraction))


def _floor(v):
    if isinstance(v, mpmath.mpf):
        return int(mpmath.floor(v))
    return math.floor(v)


def _sign(v):
    return -1 if v < 0 else 1


@dataclass(frozen=True)
class AlphaParam:
    """The parameter alpha in (0, 1], exact (Fraction) or a high-precision real."""

    value: object

    def __post_init__(self):
        v = self.value
        if isinstance(v, (int, str)):
            v = as_rational(v)
            object.__setattr__(self, "value", v)
        if not 0 < v <= 1:
            raise DomainError(f"alpha={v} is not in (0, 1]")

    @classmethod
    def of(cls, alpha):
        return alpha if isinstance(alpha, AlphaParam) else cls(alpha)

    @property
    def alpha_bar(self):
        v = self.value
        return max(v, 1 - v)

    @property
    def exact(self):
        return _is_exact(self.value)

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class Digit:
    """Partial quotient and sign of one step (``a`` folded, ``c`` unfolded)."""

    a: int
    eps: int


@dataclass
class OrbitStep:
    n: int
    x: object
    digit: Digit
    p: int
    q: int
    beta: object
    log_q: float


@dataclass
class OrbitTrace:
    alpha: AlphaParam
    x: object
    a0: int
    eps0: int
    steps: List[OrbitStep] = field(default_factory=list)
    terminated_at_zero: bool = False
    zero_index: Optional[int] = None
    truncated: bool = False

    @property
    def xs(self):
        return [s.x for s in self.steps]


def reduce_initial(x, alpha):
    """Fold ``x`` into ``[0, abar]``: returns ``(x0, a0, eps0)`` with ``x = a0 + eps0 * x0``."""
    alpha = AlphaParam.of(alpha)
    abar = alpha.alpha_bar
    a0 = _floor(x + 1 - abar)
    d = x - a0
    return abs(d), a0, _sign(d)


def folded_step(x, alpha):
    """One step of ``A_alpha`` on ``(0, abar]``: returns ``(x', Digit(a, eps))``."""
    alpha = AlphaParam.of(alpha)
    if x == 0:
        raise OrbitTerminated("A_alpha(0) = 0 is the terminal fixed point")
    if x < 0 or x > alpha.alpha_bar:
        raise DomainError(f"x={x} is outside (0, abar]")
    inv = 1 / x
    a = _floor(inv + 1 - alpha.value)
    d = inv - a
    return abs(d), Digit(a, _sign(d))


def _unfolded_digit(x, alpha_value):
    inv = 1 / abs(x)
    c = _floor(inv + 1 - alpha_value)
    return inv - c, _sign(x), c


def unfolded_step(x, alpha):
    """One step of ``T_alpha``: returns ``(x', eps_tilde, c)``.

    The domain is ``[alpha - 1, alpha)``; the right endpoint ``alpha`` itself
    is also accepted since its orbit is what matching compares.
    """
    alpha = AlphaParam.of(alpha)
    if x == 0:
        raise OrbitTerminated("T_alpha(0) = 0 is the terminal fixed point")
    if not alpha.value - 1 <= x <= alpha.value:
        raise DomainError(f"x={x} is outside [alpha-1, alpha]")
    return _unfolded_digit(x, alpha.value)


def unfolded_expansion(x, alpha, max_steps=None):
    """Iterates and digits of ``x`` under ``T_alpha`` until 0 (or ``max_steps``).

    ``x = alpha`` is accepted although it lies just outside the domain: the
    orbit of the right endpoint is what matching is about.  Returns
    ``(iterates, digits)`` with ``iterates[k] = T^k(x)`` and
    ``digits[k] = (eps_tilde_{k+1}, c_{k+1})``.
    """
    a = AlphaParam.of(alpha).value
    if not a - 1 <= x <= a:
        raise DomainError(f"x={x} is outside [alpha-1, alpha]")
    iterates = [x]
    digits = []
    while iterates[-1] != 0 and (max_steps is None or len(digits) < max_steps):
        y, eps, c = _unfolded_digit(iterates[-1], a)
        digits.append((eps, c))
        iterates.append(y)
    return iterates, digits


def digit_matrices(digits):
    """Running products ``M_0 = I, M_k = M_{k-1} [[0, eps_k], [1, c_k]]``."""
    out = [Mat2.identity()]
    for eps, c in digits:
        out.append(out[-1] @ Mat2.digit(eps, c))
    return out


def _folded_exact(x, alpha, K):
    """Integer fast path for exact orbits; x is reduced, alpha a Fraction."""
    num, den = x.numerator, x.denominator
    P, Q = alpha.numerator, alpha.denominator
    xs = [(num, den)]
    digits = []
    while num and len(digits) < K:
        a = (den * Q + num * (Q - P)) // (num * Q)
        diff = den - a * num
        digits.append((a, 1 if diff >= 0 else -1))
        num, den = abs(diff), num
        if num == 0:
            den = 1
        xs.append((num, den))
    return xs, digits


def check_orbit_invariants(trace):
    """Assert the convergent and product identities along an exact trace.

    Raises AssertionError naming the first failing step.
    """
    alpha = trace.alpha
    a = alpha.value
    x = Fraction(trace.x)
    steps = trace.steps
    abar = float(alpha.alpha_bar)
    rho = contraction_rate(alpha)
    # det of the digit-matrix product: p_n q_{n-1} - q_n p_{n-1} = (-1)^(n+1) eps_0...eps_{n-1}
    sign = -1
    for prev, st in zip(steps, steps[1:]):
        n = st.n
        sign *= -prev.digit.eps
        det = st.p * prev.q - st.q * prev.p
        assert det == sign, f"determinant identity fails at n={n}: {det} != {sign}"
        # q_1 = a_1 may equal q_0 = 1; from there on q grows strictly
        assert st.q > prev.q > 0 or (n == 1 and st.q == prev.q == 1), f"q not increasing at n={n}"
        assert st.beta == abs(st.q * x - st.p), f"beta_n != |q_n x - p_n| at n={n}"
        assert float(st.beta) <= abar * rho ** n * (1 + 1e-12), f"beta bound fails at n={n}"
    for cur, nxt in zip(steps[1:], steps[2:]):
        n = cur.n
        assert 1.0 / nxt.q < (1 + float(a)) * abar * rho ** n * (1 + 1e-12), f"1/q bound fails at n={n}"
        if nxt.x != 0:
            bq = cur.beta * nxt.q
            assert 1 / (1 + a) < bq < 1 / a, f"beta_n q_(n+1) out of range at n={n}"
    return True


def orbit(x, alpha, K, mode="exact", prec=None, validate=True):
    """Folded orbit of ``x`` with convergents and beta products, up to index ``K``.

    Steps ``n = 0..K`` are recorded (fewer if the orbit reaches 0).  Step 0
    carries the reduction digit ``(a0, eps0)``, ``p_0 = a0`` and ``q_0 = 1``.
    """
    alpha = AlphaParam.of(alpha)
    if K < 0:
        raise DomainError("K must be non-negative")
    if mode == "exact":
        if not (_is_exact(x) and alpha.exact):
            raise DomainError("exact mode needs rational x and alpha")
        trace = _orbit_exact(Fraction(x), alpha, K)
        if validate:
            check_orbit_invariants(trace)
        return trace
    if mode != "float":
        raise DomainError(f"unknown mode {mode!r}")
    return _orbit_float(x, alpha, K, precision_bits(prec))


def _orbit_exact(x, alpha, K):
    x0, a0, eps0 = reduce_initial(x, alpha)
    trace = OrbitTrace(alpha=alpha, x=x, a0=a0, eps0=eps0)
    xs, digits = _folded_exact(x0, alpha.value, K)
    p_prev, q_prev, p, q = 1, 0, a0, 1
    beta = x0
    trace.steps.append(OrbitStep(0, x0, Digit(a0, eps0), p, q, beta, 0.0))
    eps_prev = eps0
    for n, ((num, den), (a, eps)) in enumerate(zip(xs[1:], digits), start=1):
        xn = Fraction(num, den)
        p, p_prev = a * p + eps_prev * p_prev, p
        q, q_prev = a * q + eps_prev * q_prev, q
        beta = beta * xn
        trace.steps.append(OrbitStep(n, xn, Digit(a, eps), p, q, beta, math.log(q)))
        eps_prev = eps
    if trace.steps[-1].x == 0:
        trace.terminated_at_zero = True
        trace.zero_index = trace.steps[-1].n
    return trace


def _orbit_float(x, alpha, K, prec):
    with mpmath.workprec(prec):
        xm = mpmath.mpf(x) if not isinstance(x, Fraction) else mpmath.mpf(x.numerator) / x.denominator
        a = alpha.value
        am = mpmath.mpf(a.numerator) / a.denominator if isinstance(a, Fraction) else mpmath.mpf(a)
        fa = AlphaParam(am)
        floor_beta = mpmath.ldexp(1, -prec + 16)
        x0, a0, eps0 = reduce_initial(xm, fa)
        trace = OrbitTrace(alpha=alpha, x=x, a0=a0, eps0=eps0)
        p_prev, q_prev, p, q = 1, 0, a0, 1
        beta = x0
        log_q = 0.0
        r = 0.0  # q_{n-1}/q_n, kept alongside the exact integers
        trace.steps.append(OrbitStep(0, x0, Digit(a0, eps0), p, q, beta, log_q))
        xn, eps_prev = x0, eps0
        for n in range(1, K + 1):
            if xn == 0:
                break
            if beta < floor_beta:
                trace.truncated = True
                break
            xn, dig = folded_step(xn, fa)
            a_n = dig.a
            ratio = a_n + eps_prev * r
            log_q += math.log(ratio)
            r = 1.0 / ratio
            p, p_prev = a_n * p + eps_prev * p_prev, p
            q, q_prev = a_n * q + eps_prev * q_prev, q
            beta = beta * xn
            trace.steps.append(OrbitStep(n, xn, dig, p, q, beta, log_q))
            eps_prev = dig.eps
        if trace.steps[-1].x == 0:
            trace.terminated_at_zero = True
            trace.zero_index = trace.steps[-1].n
    return trace


def contraction_rate(alpha):
    """The rate ``rho_alpha`` bounding ``beta_n <= abar rho^n``."""
    a = float(alpha.value if isinstance(alpha, AlphaParam) else alpha)
    if a <= 0 or a > 1:
        raise DomainError(f"alpha={a} is not in (0, 1]")
    if a > GOLDEN:
        return GOLDEN
    if a >= SQRT2_MINUS_1:
        return SQRT2_MINUS_1
    return math.sqrt(1.0 - 2.0 * a)


def contraction_regime(alpha):
    """Which of the three formulas for ``rho_alpha`` applies, as an exact test where possible."""
    a = alpha.value if isinstance(alpha, AlphaParam) else alpha
    if _is_exact(a):
        a = Fraction(a)
        # a > g  <=>  2a + 1 > sqrt5 ;  a >= sqrt2 - 1  <=>  a + 1 >= sqrt2
        if 2 * a + 1 > 0 and (2 * a + 1) ** 2 > 5:
            return "golden"
        if (a + 1) ** 2 >= 2:
            return "silver"
        return "small"
    a = float(a)
    return "golden" if a > GOLDEN else "silver" if a >= SQRT2_MINUS_1 else "small"


def semiconjugacy_check(x, alpha, K, tol=1e-9, prec=None):
    """Check ``|T^k(x)| == A^k(|x|)`` for ``k <= K``.

    Exact for rational input; otherwise compared to relative tolerance ``tol``
    in float mode.
    """
    alpha = AlphaParam.of(alpha)
    if x == 0:
        return True
    exact = _is_exact(x) and alpha.exact
    ctx = mpmath.workprec(precision_bits(prec))
    with ctx:
        if not exact:
            x = mpmath.mpf(x)
            alpha = AlphaParam(mpmath.mpf(alpha.value) if not isinstance(alpha.value, Fraction)
                               else mpmath.mpf(alpha.value.numerator) / alpha.value.denominator)
        t, f = x, abs(x)
        for _ in range(K):
            if t == 0 or f == 0:
                return t == 0 and f == 0 if exact else abs(t) <= tol and abs(f) <= tol
            t, _, _ = unfolded_step(t, alpha)
            f, _ = folded_step(f, alpha)
            if exact:
                if abs(t) != f:
                    return False
            elif abs(abs(t) - f) > tol * max(1, abs(f)):
                return False
    return True
