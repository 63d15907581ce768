"""Type A / type B singularities of the unfolded Wilton function at rational points.

``classify`` is the exact decision procedure; ``average_probe`` and
``bmo_witness`` look at the same thing numerically through one-sided means.
"""
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels as kern
from .alpha_cf import AlphaParam, unfolded_expansion
from .exact import DomainError, as_rational
from .matching import find_matching_exponents, local_form
from .wilton import DEFAULT_KMAX, JITTER, wilton_many


class NotTypeA(DomainError):
    """The point does not behave like a type A singularity."""


@dataclass(frozen=True)
class SingularityType:
    kind: str  # "A" or "B"
    sign: str  # "+", "-" or "undetermined"
    provenance: str  # "regular" or "matching-parity"

    def __str__(self):
        return self.kind


def reduce_unfolded(x, alpha):
    """Representative of ``x`` mod 1 in ``[alpha - 1, alpha)``."""
    return x - math.floor(x + 1 - alpha)


def classify(xi, alpha):
    """Kind of singularity of the unfolded Wilton function at the rational ``xi``.

    If the orbit of ``xi`` avoids ``alpha - 1`` it is B, with the sign of the
    step at which the orbit dies.  Otherwise the parity of the matching index
    of ``alpha`` decides: even gives B, odd gives A.  For a non-rational
    ``alpha`` (floats, mpmath reals) a collision can only be a rounding
    artefact; it is reported as a warning and the point treated as regular.
    """
    xi = as_rational(xi)
    exact_alpha = isinstance(alpha, (int, Fraction, str))
    a = as_rational(alpha) if exact_alpha else Fraction(float(alpha))
    AlphaParam(a)
    x0 = reduce_unfolded(xi, a)
    iterates, _ = unfolded_expansion(x0, a)
    hit = any(y == a - 1 for y in iterates)
    if hit and not exact_alpha:
        warnings.warn(f"orbit of {xi} meets alpha - 1 only through rounding of alpha", RuntimeWarning)
        hit = False
    if not hit:
        zero_at = len(iterates) - 1
        return SingularityType("B", "+" if zero_at % 2 == 0 else "-", "regular")
    data = find_matching_exponents(a)
    if not data:
        raise DomainError(f"alpha={a}: orbit collision but no matching data")
    kind = "B" if data.index % 2 == 0 else "A"
    return SingularityType(kind, "undetermined", "matching-parity")


# ---------------------------------------------------------------------------
# numerical one-sided means


def wilton_callable(alpha, tol=1e-8, kmax=DEFAULT_KMAX, backend=None):
    """Vectorised unfolded Wilton function; dying nodes are nudged by ``JITTER * 1e-9``."""
    a = float(alpha)

    def w(t):
        t = np.asarray(t, dtype=np.float64)
        val, _, _, flag = wilton_many(t, a, tol, kmax, unfolded=True, backend=backend)
        dead = flag == kern.FLAG_ZERO
        if dead.any():
            v2, _, _, _ = wilton_many(t[dead] + 1e-9 * JITTER, a, tol, kmax, unfolded=True,
                                      backend=backend)
            val[dead] = v2
        return val

    return w


def one_sided_integral(w, xi, h, nodes=2048, shells=20):
    """``int_xi^{xi+h} w`` (``h`` of either sign) on dyadic shells graded towards ``xi``."""
    total = 0.0
    outer = abs(h)
    s = 1.0 if h > 0 else -1.0
    mid = np.arange(nodes) + 0.5
    last_mean = 0.0
    for _ in range(shells):
        inner = outer / 2
        cell = (outer - inner) / nodes
        vals = w(xi + s * (inner + mid * cell))
        total += float(np.sum(vals)) * cell
        last_mean = float(np.mean(vals))
        outer = inner
    total += last_mean * outer
    return s * total


@dataclass
class ProbeRow:
    h: float
    right: float  # (1/h) int_xi^{xi+h}
    left: float  # (1/h) int_{xi-h}^{xi}, the signed mean on the left

    @property
    def left_unsigned(self):
        return -self.left


def average_probe(alpha=None, xi=0, scales=(4e-3, 2e-3, 1e-3), tol=1e-8, func=None,
                  nodes=2048, backend=None):
    """One-sided means of ``func`` (default: the unfolded Wilton function) at ``xi``."""
    scales = [float(h) for h in scales]
    if any(b >= a for a, b in zip(scales, scales[1:])):
        raise DomainError("scales must be strictly decreasing")
    if min(scales) < 1e-6:
        raise DomainError("smallest scale must be >= 1e-6")
    w = func or wilton_callable(alpha, tol, backend=backend)
    x = float(xi)
    rows = []
    for h in scales:
        right = one_sided_integral(w, x, h, nodes) / h
        left = -one_sided_integral(w, x, -h, nodes) / h
        rows.append(ProbeRow(h, right, left))
    return rows


def probe_pattern(rows, kind, sign=None, floor=5.0):
    """Finite surrogate for a type ``kind`` divergence, read off probe rows.

    The two compared means are ``right`` and the signed left mean for B,
    ``right`` and the unsigned left mean for A.  At every scale they must
    share a sign, and as ``h`` shrinks both must move strictly towards the
    infinity ``sign`` (inferred from the right mean when omitted).  With a
    ``floor`` both must also end beyond ``floor`` on that side.
    """
    if kind not in ("A", "B"):
        raise DomainError(f"unknown kind {kind!r}")
    u = [r.right for r in rows]
    v = [r.left if kind == "B" else r.left_unsigned for r in rows]
    if any(a * b <= 0 for a, b in zip(u, v)):
        return False
    d = {"+": 1.0, "-": -1.0}.get(sign) or math.copysign(1.0, u[-1] - u[0])
    for seq in (u, v):
        if any(d * (b - a) <= 0 for a, b in zip(seq, seq[1:])):
            return False
        if floor is not None and d * seq[-1] < floor:
            return False
    return True


def transported(alpha, tol=1e-8, backend=None):
    """``x -> weight(x) * W(phi(x))`` from the local form at rational ``alpha``."""
    lf = local_form(alpha)
    a = float(lf.alpha)
    w = wilton_callable(a, tol, backend=backend)
    L, R = lf.phi_left, lf.phi_right

    def beta_tilde(y, k):
        out = np.ones_like(y)
        for i in range(k + 1):
            out *= np.abs(y)
            if i < k:
                inv = 1.0 / np.abs(y)
                y = inv - np.floor(inv + 1.0 - a)
        return out

    def g(x):
        x = np.asarray(x, dtype=np.float64)
        left = x < a
        y = np.where(left, x, x - 1.0)
        phi = np.where(left, (L.a * y + L.b) / (L.c * y + L.d), (R.a * y + R.b) / (R.c * y + R.d))
        wt = np.where(left, (-1.0) ** lf.depth_left * beta_tilde(y, lf.depth_left - 1),
                      (-1.0) ** lf.depth_right * beta_tilde(y, lf.depth_right - 1))
        return wt * w(phi)

    return g, lf


# ---------------------------------------------------------------------------
# BMO failure witness


def _graded_nodes(xi, eps, nodes, shells):
    """Midpoint nodes and cell widths on ``(xi - eps, xi + eps)``, refined towards ``xi``."""
    pts, widths = [], []
    mid = np.arange(nodes) + 0.5
    outer = eps
    for _ in range(shells):
        inner = outer / 2
        cell = (outer - inner) / nodes
        off = inner + mid * cell
        pts += [xi - off, xi + off]
        widths += [np.full(nodes, cell)] * 2
        outer = inner
    cell = 2 * outer / nodes
    pts.append(xi - outer + mid * cell)
    widths.append(np.full(nodes, cell))
    x = np.concatenate(pts)
    wd = np.concatenate(widths)
    order = np.argsort(x)
    return x[order], wd[order]


@dataclass
class Witness:
    x_minus: float
    x_plus: float
    integral: float
    check_integral: float
    epsilon: float

    @property
    def normalized(self):
        return abs(self.integral) / (self.x_plus - self.x_minus)


def bmo_witness(alpha, xi, epsilon=0.05, tol=1e-3, nodes=2048, shells=18, func=None,
                max_shrink=12, backend=None):
    """Points ``x- < xi < x+`` within ``epsilon`` with a vanishing mean in between.

    Follows the intermediate value argument: shrink ``epsilon`` until the two
    one-sided integrals have opposite signs, then scan 64 subintervals of the
    longer side for a sign change of the running integral and bisect it.
    ``check_integral`` recomputes the final integral on an independent grid.
    """
    xi_q = as_rational(xi) if not isinstance(xi, float) else None
    if func is None:
        if xi_q is not None and isinstance(alpha, (int, Fraction, str)):
            st = classify(xi_q, alpha)
            if st.kind != "A":
                raise NotTypeA(f"xi={xi} is a type {st.kind} point for alpha={alpha}")
        w = wilton_callable(as_rational(alpha) if isinstance(alpha, str) else alpha, backend=backend)
    else:
        w = func
    c = float(xi)
    eps = float(epsilon)
    for _ in range(max_shrink):
        x, wd = _graded_nodes(c, eps, nodes, shells)
        vals = w(x)
        # running integral at cell right edges, linear inside each cell
        edges = np.concatenate(([x[0] - wd[0] / 2], x + wd / 2))
        cum = np.concatenate(([0.0], np.cumsum(vals * wd)))
        k_mid = int(np.searchsorted(edges, c))
        left_int = cum[k_mid]
        right_int = cum[-1] - cum[k_mid]
        if left_int * right_int < 0:
            break
        eps /= 2
    else:
        raise NotTypeA(f"one-sided integrals never had opposite signs near xi={xi}")

    def G(t):
        return float(np.interp(t, edges, cum))

    total = cum[-1]
    if total == 0:
        lo_x, hi_x = c - eps, c + eps
    elif total > 0 and left_int < 0 or total < 0 and left_int > 0:
        # move the right end inwards: F(t) = int_{c-eps}^{t}, F(c) and F(c+eps) differ in sign
        lo_x = c - eps
        hi_x = _root(lambda t: G(t) - G(lo_x), c, c + eps, tol)
    else:
        hi_x = c + eps
        lo_x = _root(lambda t: G(hi_x) - G(t), c - eps, c, tol)
    integral = G(hi_x) - G(lo_x)
    check = _plain_integral(w, lo_x, hi_x, c, 2 * nodes, shells)
    if abs(integral) > tol * (hi_x - lo_x):
        raise NotTypeA(f"bisection did not reach tolerance near xi={xi}")
    return Witness(float(lo_x), float(hi_x), float(integral), float(check), eps)


def _root(F, a, b, tol, scan=64):
    """Scan ``[a, b]`` in ``scan`` pieces for a sign change of ``F``, then bisect."""
    grid = np.linspace(a, b, scan + 1)
    vals = [F(t) for t in grid]
    for i in range(scan):
        if vals[i] == 0:
            return grid[i]
        if vals[i] * vals[i + 1] < 0:
            lo, hi, flo = grid[i], grid[i + 1], vals[i]
            for _ in range(200):
                m = 0.5 * (lo + hi)
                fm = F(m)
                if abs(fm) <= tol * (b - a) * 1e-3 or hi - lo < 1e-15:
                    return m
                if fm * flo < 0:
                    hi = m
                else:
                    lo, flo = m, fm
            return 0.5 * (lo + hi)
    return grid[-1] if abs(vals[-1]) < abs(vals[0]) else grid[0]


def _plain_integral(w, lo, hi, c, nodes, shells):
    total = 0.0
    if lo < c:
        total += -one_sided_integral(w, c, lo - c, nodes, shells)
    if hi > c:
        total += one_sided_integral(w, c, hi - c, nodes, shells)
    return total
