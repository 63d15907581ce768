"""Wilton, Brjuno and alternating q-series evaluation along alpha-CF orbits.

Batch evaluation goes through the compiled kernels in double-double
arithmetic.  Rational points and explicit ``backend="mpmath"`` requests are
evaluated step by step from :func:`alphawilton.alpha_cf.orbit` instead.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List

import mpmath
import numpy as np

from . import _kernels as kern
from ._dd import to_dd, to_dd_arrays
from .alpha_cf import AlphaParam, orbit, precision_bits
from .exact import DomainError

DEFAULT_TOL = 1e-8
DEFAULT_KMAX = 200

JITTER = (math.sqrt(2.0) - 1.0) / 1024.0


@dataclass
class WiltonValue:
    value: float
    err_est: float
    K_used: int
    hit_zero: bool
    flag: str = ""

    @property
    def converged(self):
        return self.flag == ""


def _check_alpha(alpha):
    a = alpha.value if isinstance(alpha, AlphaParam) else alpha
    if not 0 < a <= 1:
        raise DomainError(f"alpha={a} is not in (0, 1]")
    return a


def _from_kernel(val, err, k, flag):
    return WiltonValue(float(val), float(err), int(k), int(flag) == kern.FLAG_ZERO,
                       kern.FLAG_NAMES[int(flag)])


def _run_mpmath(x, alpha, tol, kmax, mode, prec=None):
    """Step-by-step evaluation on an exact or mpmath orbit."""
    exact = isinstance(x, (int, Fraction)) and isinstance(alpha, (int, Fraction))
    bits = precision_bits(prec)
    with mpmath.workprec(bits):
        tr = orbit(x, alpha, kmax + 1, mode="exact" if exact else "float", prec=bits, validate=False)
        steps = tr.steps
        total = mpmath.mpf(0)
        sign = 1
        beta_prev = mpmath.mpf(1)
        err, used, flag = math.inf, -1, "kmax"
        for j, st in enumerate(steps[:kmax + 1]):
            if st.x == 0:
                flag = "zero"
                break
            nxt = steps[j + 1].x if j + 1 < len(steps) else None
            log_next = abs(mpmath.log(_mp(nxt))) if nxt else 0
            if mode == kern.MODE_QSERIES:
                if nxt is None:
                    break
                q_next = steps[j + 1].q
                total += sign * mpmath.log(q_next) / st.q
                scale = mpmath.mpf(1) / q_next
                bound = (1 + mpmath.log(q_next) + log_next) / q_next
            else:
                total += sign * beta_prev * -mpmath.log(_mp(st.x))
                beta_prev *= _mp(st.x)
                scale = beta_prev
                bound = beta_prev * (1 + log_next)
            if mode != kern.MODE_BRJUNO:
                sign = -sign
            used = j
            err = float(bound)
            nxt_zero = j + 1 < len(steps) and steps[j + 1].x == 0
            if tol <= 0:
                if j == kmax:
                    flag = ""
                continue
            if nxt_zero:
                flag = "zero"
                break
            if bound < tol:
                flag = ""
                break
            if scale < mpmath.ldexp(1, -bits + 16):
                flag = "precision"
                break
        if flag == "zero":
            err = math.inf
        return WiltonValue(float(total), err, used, flag == "zero", flag)


def _mp(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


def _evaluate(x, alpha, tol, kmax, mode, unfolded=False, backend=None):
    a = _check_alpha(alpha)
    if backend == "mpmath" or (isinstance(x, Fraction) and not unfolded):
        return _run_mpmath(x, a, tol, kmax, mode)
    if isinstance(x, Fraction) and unfolded:
        return _run_mpmath(_fold_unfolded(x, a), a, tol, kmax, mode)
    hi, lo = to_dd(x)
    out = kern.series_batch(np.array([hi]), np.array([lo]), a, tol, kmax, mode, unfolded, backend)
    return _from_kernel(*(v[0] for v in out))


def _fold_unfolded(x, a):
    """``|x|`` after reduction into ``[alpha - 1, alpha)``."""
    return abs(x - math.floor(x + 1 - a))


def _partial(x, alpha, K, mode, backend):
    if K < 0:
        raise DomainError("K must be non-negative")
    r = _evaluate(x, alpha, 0.0, K, mode, backend=backend)
    if r.hit_zero and mode != kern.MODE_QSERIES:
        # the first vanishing iterate sits at index K_used + 1 <= K
        j = r.K_used + 1
        return math.inf if mode == kern.MODE_BRJUNO or j % 2 == 0 else -math.inf
    return r.value


def wilton_partial(x, alpha, K, backend=None):
    """``sum_{j<=K} (-1)^j beta_{j-1} log(1/x_j)``; a vanishing iterate gives a signed infinity."""
    return _partial(x, alpha, K, kern.MODE_WILTON, backend)


def brjuno_partial(x, alpha, K, backend=None):
    """All-plus-signs companion of :func:`wilton_partial`."""
    return _partial(x, alpha, K, kern.MODE_BRJUNO, backend)


def q_series_partial(x, alpha, K, backend=None):
    """``sum_{n<=K} (-1)^n log(q_{n+1}) / q_n``, truncated early if the orbit ends."""
    return _partial(x, alpha, K, kern.MODE_QSERIES, backend)


def wilton_eval(x, alpha, tol=DEFAULT_TOL, kmax=DEFAULT_KMAX, backend=None):
    if tol <= 0:
        raise DomainError("tol must be positive")
    return _evaluate(x, alpha, tol, kmax, kern.MODE_WILTON, backend=backend)


def q_series_eval(x, alpha, tol=DEFAULT_TOL, kmax=DEFAULT_KMAX, backend=None):
    if tol <= 0:
        raise DomainError("tol must be positive")
    return _evaluate(x, alpha, tol, kmax, kern.MODE_QSERIES, backend=backend)


def brjuno_eval(x, alpha, tol=DEFAULT_TOL, kmax=DEFAULT_KMAX, backend=None):
    if tol <= 0:
        raise DomainError("tol must be positive")
    return _evaluate(x, alpha, tol, kmax, kern.MODE_BRJUNO, backend=backend)


def wilton_unfolded(x, alpha, tol=DEFAULT_TOL, kmax=DEFAULT_KMAX, backend=None):
    """The one-periodic unfolded function, ``W_alpha(|x|)`` on ``[alpha - 1, alpha)``."""
    return _evaluate(x, alpha, tol, kmax, kern.MODE_WILTON, unfolded=True, backend=backend)


def wilton_many(xs, alpha, tol=DEFAULT_TOL, kmax=DEFAULT_KMAX, unfolded=False,
                mode=kern.MODE_WILTON, backend=None):
    """Vectorised evaluation; returns ``(value, err_est, k_used, flag)`` arrays."""
    a = _check_alpha(alpha)
    hi, lo = to_dd_arrays(xs)
    return kern.series_batch(hi, lo, a, tol, kmax, mode, unfolded, backend)


def _jittered(xs, alpha, tol, kmax, unfolded, cell, backend):
    """Evaluate at ``xs``; nodes whose orbit dies are shifted by ``cell * JITTER`` once."""
    val, err, k, flag = wilton_many(xs, alpha, tol, kmax, unfolded, backend=backend)
    moved = np.zeros(len(xs), dtype=bool)
    dead = flag == kern.FLAG_ZERO
    if dead.any():
        shifted = np.asarray(xs, dtype=np.float64)[dead] + cell * JITTER
        v2, e2, k2, f2 = wilton_many(shifted, alpha, tol, kmax, unfolded, backend=backend)
        xs = np.array(xs, dtype=np.float64)
        xs[dead] = shifted
        val[dead], err[dead], k[dead], flag[dead] = v2, e2, k2, f2
        moved[dead] = True
    return np.asarray(xs, dtype=np.float64), val, err, k, flag, moved


def integral_near_zero(alpha, x_upper, quad_points=4096, tol=DEFAULT_TOL, kmax=DEFAULT_KMAX,
                       shells=24, backend=None):
    """``int_0^x`` of the unfolded function by composite midpoint rules on dyadic shells.

    The interval between 0 and ``x_upper`` (which may be negative) is split
    into ``(x/2, x], (x/4, x/2], ...``, each integrated with ``quad_points``
    midpoint nodes; the innermost remainder uses ``-t log t + t``.
    Returns ``(value, jittered_nodes)``.
    """
    _check_alpha(alpha)
    if not 0 < abs(x_upper) <= 0.1:
        raise DomainError("|x_upper| must lie in (0, 0.1]")
    sgn = 1.0 if x_upper > 0 else -1.0
    X = abs(float(x_upper))
    total = 0.0
    jittered = 0
    hi = X
    for _ in range(shells):
        lo = hi / 2
        cell = (hi - lo) / quad_points
        t = lo + (np.arange(quad_points) + 0.5) * cell
        _, val, _, _, _, moved = _jittered(sgn * t, alpha, tol, kmax, True, cell, backend)
        total += float(np.sum(val)) * cell
        jittered += int(moved.sum())
        hi = lo
    total += -hi * math.log(hi) + hi
    return sgn * total, jittered


@dataclass
class GridRow:
    x: float
    value: float
    err_est: float
    k_used: int
    flag: str


def grid_emit(alpha, a, b, N, tol=DEFAULT_TOL, kmax=DEFAULT_KMAX, unfolded=False, backend=None):
    """Cell-midpoint samples of ``W_alpha`` on ``(a, b)`` in increasing order.

    Nodes whose orbit hits 0 are jittered and flagged ``jitter``; remaining
    non-converged nodes carry the kernel flag.
    """
    if not a < b or N < 2:
        raise DomainError("grid needs a < b and N >= 2")
    cell = (b - a) / N
    xs = a + (np.arange(N) + 0.5) * cell
    xs, val, err, k, flag, moved = _jittered(xs, alpha, tol, kmax, unfolded, cell, backend)
    rows = []
    for i in range(N):
        f = kern.FLAG_NAMES[int(flag[i])]
        if moved[i] and not f:
            f = "jitter"
        rows.append(GridRow(float(xs[i]), float(val[i]), float(err[i]), int(k[i]), f))
    return rows


@dataclass
class WiltonDiag:
    partial_sums: List[float]
    terms: List[float]
    tail_oscillation: float
    spikes: List[int] = field(default_factory=list)
    verdict: str = "inconclusive"
    bounded_horizon: bool = True


def gauss_digits(x, K, prec=None):
    """First ``K`` Gauss digits of ``x`` (a real or a zero-argument callable) with ``128 + 8K`` bits."""
    digits = []
    with mpmath.workprec(prec or 128 + 8 * K):
        y = mpmath.mpf(x() if callable(x) else x)
        y -= mpmath.floor(y)
        for _ in range(K):
            if y == 0:
                break
            r = 1 / y
            a = int(mpmath.floor(r))
            digits.append(a)
            y = r - a
    return digits


def wilton_condition_diag(x=None, K=60, digits=None, osc_tol=1e-6, spike_factor=2.0):
    """Bounded-horizon look at ``sum_j (-1)^j log(q_{j+1}) / q_j`` for the Gauss expansion.

    Either ``x`` or an explicit digit list ``[a_1, a_2, ...]`` is accepted.
    A spike is a term more than ``spike_factor`` times both predecessors.
    The verdict is ``convergent`` when the partial sums over the last third of
    the horizon vary by less than ``osc_tol`` and no spike falls there.
    """
    if digits is None:
        if x is None:
            raise DomainError("need x or digits")
        digits = gauss_digits(x, K + 1)
    digits = list(digits)[:K + 1]
    q_prev, q = 0, 1
    qs = [1]
    for a in digits:
        q_prev, q = q, a * q + q_prev
        qs.append(q)
    terms, sums = [], []
    s = 0.0
    for j in range(len(qs) - 1):
        t = (-1) ** j * math.log(qs[j + 1]) / qs[j]
        terms.append(t)
        s += t
        sums.append(s)
    spikes = [j for j in range(2, len(terms))
              if abs(terms[j]) > spike_factor * max(abs(terms[j - 1]), abs(terms[j - 2]))]
    tail_from = max(1, 2 * len(sums) // 3)
    tail = sums[tail_from:] or sums[-1:]
    osc = max(tail) - min(tail) if tail else math.inf
    late_spike = any(j >= tail_from for j in spikes)
    verdict = "convergent" if osc < osc_tol and not late_spike else "inconclusive"
    return WiltonDiag(sums, terms, osc, spikes, verdict)
