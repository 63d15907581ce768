"""Joint orbits of ``A_alpha`` and ``A_{1/2}`` for alpha in ``[1 - g, 1/2]``.

Every step of the pair of orbits falls into one of four states:

* A: ``x = x'`` and ``q = q'``
* B: ``x = 1 - x'`` with ``x'`` in ``[alpha, 1/2]`` and ``q - q' = q_prev``
* C: ``1/x - 1 = 1/(1 - x')`` and ``q - q' = -q'_prev``
* D: ``1/x - 1 = 1/x'`` and ``q = q'``

and the states only move along the edges in :data:`EDGES`.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

import mpmath
import numpy as np

from . import _kernels as kern
from .alpha_cf import AlphaParam, _folded_exact, reduce_initial
from .exact import DomainError, as_rational
from .matching import t_sequence
from .wilton import JITTER, wilton_many

HALF = Fraction(1, 2)
GOLD = (math.sqrt(5.0) - 1.0) / 2.0
LOG_G2 = math.log(GOLD + 2.0)

EDGES = frozenset({("A", "A"), ("A", "B"), ("B", "C"), ("B", "D"),
                   ("C", "C"), ("C", "D"), ("D", "A"), ("D", "B")})

X_TOL = 1e-9


class NoStateMatch(RuntimeError):
    """A step fits none of the four states."""


def le_golden(r):
    """Exact test ``r <= g`` for rational ``r``, via ``2r + 1 <= sqrt 5``."""
    r = Fraction(r)
    s = 2 * r + 1
    return s <= 0 or s * s <= 5


def in_sync_range(alpha):
    """``1 - g <= alpha <= 1/2``; exact for rationals."""
    if isinstance(alpha, (int, Fraction)):
        a = Fraction(alpha)
        # 1 - g <= a  <=>  g >= 1 - a  <=>  not (1 - a > g)
        return a <= HALF and le_golden(1 - a) and (1 - a != 0)
    a = float(alpha)
    return 1.0 - GOLD - 1e-15 <= a <= 0.5


@dataclass
class SyncStep:
    i: int
    state: str
    x: object
    xp: object
    q: int
    qp: int


@dataclass
class SyncTrace:
    alpha: object
    x: object
    mode: str
    steps: List[SyncStep] = field(default_factory=list)
    truncated_at: Optional[int] = None

    @property
    def states(self):
        return "".join(s.state for s in self.steps)


def _classify_exact(x, xp, q, qp, q_prev, qp_prev, alpha):
    n, d = x
    n2, d2 = xp
    if n == n2 and d == d2 and q == qp:
        return "A"
    if (d - n) * n2 == n * d2 and q == qp:
        return "D"
    if n == d2 - n2 and d == d2 and q - qp == q_prev and alpha * d2 <= n2 and 2 * n2 <= d2:
        return "B"
    if (d - n) * (d2 - n2) == n * d2 and q - qp == -qp_prev:
        return "C"
    return None


def _close(a, b):
    return abs(a - b) <= X_TOL * max(1.0, abs(a), abs(b))


def _classify_float(x, xp, q, qp, q_prev, qp_prev, alpha):
    if q == qp and _close(x, xp):
        return "A"
    if q == qp and x != 0 and xp != 0 and _close(1 / x - 1, 1 / xp):
        return "D"
    if q - qp == q_prev and _close(x, 1 - xp) and alpha - X_TOL <= xp <= 0.5 + X_TOL:
        return "B"
    if q - qp == -qp_prev and x != 0 and xp != 1 and _close(1 / x - 1, 1 / (1 - xp)):
        return "C"
    return None


def _qs(a0_digits):
    """``q_0 .. q_k`` from ``[(a_1, eps_1), ...]`` with the reduction sign ``eps_0`` first."""
    eps0, digits = a0_digits
    q_prev, q = 0, 1
    out = [1]
    eps = eps0
    for a, e in digits:
        q_prev, q = q, a * q + eps * q_prev
        out.append(q)
        eps = e
    return out


def sync_trace(x, alpha, K, mode="exact", prec=None):
    """Classify ``S_0 .. S_K`` for the orbits of ``x`` under ``A_alpha`` and ``A_{1/2}``.

    Exact mode needs rational ``x`` and ``alpha``; the trace stops before
    the first index at which either orbit reaches 0.  Float mode runs both orbits in mpmath with
    ``64 + 6K`` bits unless ``prec`` is given, and also stops once the
    denominators are too large for that precision (``truncated_at``).  Raises :class:`NoStateMatch`
    on a step that fits no state.
    """
    if not in_sync_range(alpha):
        raise DomainError(f"alpha={alpha} is outside [1-g, 1/2]")
    if mode == "exact":
        return _trace_exact(as_rational(x), as_rational(alpha), K)
    if mode != "float":
        raise DomainError(f"unknown mode {mode!r}")
    return _trace_float(x, alpha, K, prec or 64 + 6 * K)


def _alive(xs, is_zero):
    """Number of leading nonzero iterates."""
    for i, v in enumerate(xs):
        if is_zero(v):
            return i
    return len(xs)


def _trace_exact(x, alpha, K):
    x0, _, e0 = reduce_initial(x, AlphaParam(alpha))
    y0, _, f0 = reduce_initial(x, AlphaParam(HALF))
    xs, dig = _folded_exact(x0, alpha, K)
    ys, dig2 = _folded_exact(y0, HALF, K)
    qs, qps = _qs((e0, dig)), _qs((f0, dig2))
    L = min(_alive(xs, lambda v: v[0] == 0), _alive(ys, lambda v: v[0] == 0))
    tr = SyncTrace(alpha, x, "exact")
    if L < K + 1:
        tr.truncated_at = L - 1
    for i in range(L):
        q_prev = qs[i - 1] if i else 0
        qp_prev = qps[i - 1] if i else 0
        st = _classify_exact(xs[i], ys[i], qs[i], qps[i], q_prev, qp_prev, alpha)
        if st is None:
            raise NoStateMatch(f"step {i}: x={xs[i]}, x'={ys[i]}, q={qs[i]}, q'={qps[i]}")
        tr.steps.append(SyncStep(i, st, Fraction(*xs[i]), Fraction(*ys[i]), qs[i], qps[i]))
    return tr


def _float_orbit(x, alpha, K):
    a = mpmath.mpf(alpha)
    abar = max(a, 1 - a)
    a0 = mpmath.floor(x + 1 - abar)
    d = x - a0
    eps0 = -1 if d < 0 else 1
    y = abs(d)
    xs, dig = [y], []
    for _ in range(K):
        if y == 0:
            break
        inv = 1 / y
        c = int(mpmath.floor(inv + 1 - a))
        d = inv - c
        dig.append((c, -1 if d < 0 else 1))
        y = abs(d)
        xs.append(y)
    return xs, (eps0, dig)


def _trace_float(x, alpha, K, prec):
    tr = SyncTrace(alpha, x, "float")
    with mpmath.workprec(prec):
        xm = mpmath.mpf(x.numerator) / x.denominator if isinstance(x, Fraction) else mpmath.mpf(x)
        am = mpmath.mpf(alpha.numerator) / alpha.denominator if isinstance(alpha, Fraction) else mpmath.mpf(alpha)
        xs, d1 = _float_orbit(xm, am, K)
        ys, d2 = _float_orbit(xm, mpmath.mpf(0.5), K)
        qs, qps = _qs(d1), _qs(d2)
        L = min(_alive(xs, lambda v: v == 0), _alive(ys, lambda v: v == 0))
        # x_i carries an error of about q_i^2 2^-prec; stop before it reaches X_TOL
        budget = prec - 40
        for i in range(L):
            if 2 * max(qs[i], qps[i]).bit_length() > budget:
                L = i
                break
        if L < K + 1:
            tr.truncated_at = L - 1
        af = float(am)
        for i in range(L):
            xf, yf = float(xs[i]), float(ys[i])
            q_prev = qs[i - 1] if i else 0
            qp_prev = qps[i - 1] if i else 0
            st = _classify_float(xf, yf, qs[i], qps[i], q_prev, qp_prev, af)
            if st is None:
                raise NoStateMatch(f"step {i}: x={xf!r}, x'={yf!r}, q={qs[i]}, q'={qps[i]}")
            tr.steps.append(SyncStep(i, st, xf, yf, qs[i], qps[i]))
    return tr


# ---------------------------------------------------------------------------
# validation


@dataclass
class Report:
    failures: List[str] = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self):
        return not self.failures

    def merge(self, other):
        self.failures += other.failures
        self.checked += other.checked
        return self


def _t_index(xp, limit=200):
    """The ``m >= 1`` with ``xp`` in ``(t_m, t_{m-1}]``."""
    for m in range(1, limit):
        if t_sequence(m) < xp <= t_sequence(m - 1):
            return m
    return None


def validate_trace(trace, q_bound="prev"):
    """Check edges, the a priori bounds, the size of ``q - q'`` and the shape of B-runs.

    ``q_bound="prev"`` tests ``|q_i - q'_i| <= q_(i-1)``.  That fails inside
    C-runs of length two or more (only possible for alpha < 5/13), where the
    gap is ``q'_(i-1) > q_(i-1)``; ``q_bound="prime"`` tests
    ``|q_i - q'_i| <= q'_(i-1)`` instead, which holds in every state.
    """
    if q_bound not in ("prev", "prime"):
        raise DomainError(f"unknown q_bound {q_bound!r}")
    rep = Report()
    steps = trace.steps
    if not steps:
        return rep
    if steps[0].state not in "AB":
        rep.failures.append(f"step 0 starts in state {steps[0].state}")
    for s, t in zip(steps, steps[1:]):
        if (s.state, t.state) not in EDGES:
            rep.failures.append(f"step {t.i}: forbidden transition {s.state}->{t.state}")
    for k, s in enumerate(steps):
        rep.checked += 1
        if s.state == "B" and s.x < HALF:
            rep.failures.append(f"step {s.i}: state B with x={s.x} < 1/2")
        if s.state == "C" and s.x < Fraction(1, 3):
            rep.failures.append(f"step {s.i}: state C with x={s.x} < 1/3")
        prev = steps[k - 1] if k else None
        if q_bound == "prev":
            bound, name = (prev.q if prev else 0), "q_prev"
        else:
            bound, name = (prev.qp if prev else 0), "q'_prev"
        if abs(s.q - s.qp) > bound:
            rep.failures.append(f"step {s.i}: |q - q'| = {abs(s.q - s.qp)} > {name} = {bound}")
        if s.state == "B":
            xp = Fraction(s.xp) if trace.mode == "exact" else s.xp
            m = _t_index(xp)
            if m is None:
                rep.failures.append(f"step {s.i}: x'={s.xp} outside (1-g, 1/2]")
                continue
            want = "C" * (m - 1) + "D"
            got = "".join(t.state for t in steps[k + 1:k + 1 + m])
            if got != want[:len(got)]:
                rep.failures.append(f"step {s.i}: B-run {got!r}, expected {want!r} (m={m})")
    return rep


def _ratio_le_golden(num, den):
    return le_golden(Fraction(num, den))


def monitors(trace):
    """Hurwitz bound, ``1-g <= q/q' <= 2``, the log bound and the ``1/q`` bound, step by step."""
    rep = Report()
    st = trace.steps
    for n in range(len(st) - 1):
        rep.checked += 1
        a, b = st[n], st[n + 1]
        if not _ratio_le_golden(a.qp, b.qp):
            rep.failures.append(f"step {n}: q'_n/q'_(n+1) = {a.qp}/{b.qp} > g")
        r = Fraction(b.q, b.qp)
        if not (le_golden(1 - r) and r <= 2):
            rep.failures.append(f"step {n + 1}: q/q' = {r} outside [1-g, 2]")
        # |log r| <= log(g + 2)  <=>  1/(g+2) <= r <= g + 2
        if not (le_golden(r - 2) and le_golden(1 / r - 2)):
            rep.failures.append(f"step {n + 1}: |log q/q'| exceeds log(g+2)")
        if n >= 1 and abs(a.q - a.qp) == st[n - 1].qp:
            if b.qp > 4 * a.qp:
                rep.failures.append(f"step {n}: q'_(n+1) = {b.qp} > 4 q'_n")
            gap = abs(a.qp - a.q)
            # gap/(q q') <= 4/(g q'_(n+1))  <=>  g <= 4 q q' / (gap q'_(n+1)); g is irrational
            if gap and le_golden(Fraction(4 * a.q * a.qp, gap * b.qp)):
                rep.failures.append(f"step {n}: |1/q - 1/q'| bound fails")
    return rep


def nicf_hurwitz_max(x0, steps, backend=None):
    """Largest ``q'_i / q'_(i+1)`` along nearest-integer orbits (float64)."""
    x = np.asarray(x0, dtype=np.float64).copy()
    r = np.zeros_like(x)
    eps = np.ones_like(x)
    worst = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(steps):
            inv = 1.0 / x
            a = np.floor(inv + 0.5)
            d = inv - a
            ratio = a + eps * r  # q_{n+1} / q_n
            r = 1.0 / ratio
            worst = max(worst, float(np.nanmax(r)))
            eps = np.where(d >= 0, 1.0, -1.0)
            x = np.abs(d)
            x[x == 0.0] = 0.5 * (math.sqrt(5.0) - 1.0)
    return worst


# ---------------------------------------------------------------------------
# the alpha = 2/5 difference


def h_B_to_D(x):
    """Bounded part of ``W_{2/5} - W_{1/2}`` over one B->D passage, ``x`` in ``[1/2, 3/5]``."""
    x = float(x)
    if not 0.5 <= x <= 0.6 + 1e-15:
        raise DomainError(f"x={x} is outside [1/2, 3/5]")
    t = 2 * x - 1
    if t < 1e-4:
        tlogt = t * math.log(t) if t > 0 else 0.0
        return (-math.log(x) + math.log1p(-x) - x * math.log(x) + (1 - x) * math.log1p(-x)
                + tlogt)
    return (-math.log(x) - x * math.log(x / t) + math.log1p(-x)
            + (1 - x) * math.log((1 - x) / t))


def diff_series_25(x, K=50, mode="exact"):
    """``sum over B-states k <= K of (-1)^k beta_(k-1) h(x_k)`` at ``alpha = 2/5``."""
    if K < 1:
        raise DomainError("K must be >= 1")
    if not 0.5 < float(x) < 0.6:
        raise DomainError(f"x={x} is outside (1/2, 3/5)")
    tr = sync_trace(x, Fraction(2, 5), K, mode=mode)
    total = 0.0
    beta = 1.0
    for s in tr.steps:
        xf = float(s.x)
        if s.state == "B":
            total += (-1) ** s.i * beta * h_B_to_D(xf)
        beta *= xf
    return total


@dataclass
class SupNorm:
    max_abs: float
    argmax: float
    points: int
    dropped: int
    max_err: float


def supnorm_scan(alpha, N=10_000, tol=1e-6, kmax=400, backend=None):
    """``max |W_alpha - W_{1/2}|`` over the cell midpoints of ``(0, 1)``.

    Each function is evaluated to ``tol / 2``; nodes on dying orbits are
    jittered once and dropped if still not converged.
    """
    a = float(alpha)
    if not in_sync_range(alpha if isinstance(alpha, Fraction) else a):
        raise DomainError(f"alpha={alpha} is outside [1-g, 1/2]")
    cell = 1.0 / N
    xs = (np.arange(N) + 0.5) * cell
    vals, errs, good = [], [], np.ones(N, dtype=bool)
    for al in (a, 0.5):
        v, e, _, f = wilton_many(xs, al, tol / 2, kmax, backend=backend)
        dead = f == kern.FLAG_ZERO
        if dead.any():
            xs = xs.copy()
            xs[dead] += cell * JITTER
            return supnorm_scan_nodes(xs, a, tol, kmax, backend)
        vals.append(v)
        errs.append(e)
        good &= f == kern.FLAG_OK
    return _supnorm_result(xs, vals, errs, good)


def supnorm_scan_nodes(xs, a, tol, kmax, backend=None):
    vals, errs, good = [], [], np.ones(len(xs), dtype=bool)
    for al in (a, 0.5):
        v, e, _, f = wilton_many(xs, al, tol / 2, kmax, backend=backend)
        vals.append(v)
        errs.append(e)
        good &= f == kern.FLAG_OK
    return _supnorm_result(xs, vals, errs, good)


def _supnorm_result(xs, vals, errs, good):
    diff = np.abs(vals[0] - vals[1])
    diff[~good] = -np.inf
    i = int(np.argmax(diff))
    err = errs[0] + errs[1]
    return SupNorm(float(diff[i]), float(xs[i]), int(good.sum()), int((~good).sum()),
                   float(np.max(err[good])) if good.any() else math.inf)
