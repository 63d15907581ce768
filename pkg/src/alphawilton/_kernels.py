"""Hot loops: batched series evaluation, log-denominator growth, orbit histograms.

Each kernel exists twice: a per-element loop compiled with numba and a
vectorised numpy version that advances all still-active points one step at a
time.  :func:`series_batch`, :func:`logq_batch` and :func:`orbit_histogram`
pick one according to :mod:`alphawilton._accel`.
"""
import math
from fractions import Fraction

import numpy as np

from ._accel import backend_name, jitable, njit
from ._dd import DD_BITS, dd_abs, dd_add, dd_div, dd_floor, dd_log, to_dd

MODE_WILTON = 0
MODE_BRJUNO = 1
MODE_QSERIES = 2

FLAG_OK = 0
FLAG_ZERO = 1
FLAG_KMAX = 2
FLAG_PRECISION = 3

FLAG_NAMES = {FLAG_OK: "", FLAG_ZERO: "zero", FLAG_KMAX: "kmax", FLAG_PRECISION: "precision"}

# beta below this no longer has meaningful digits in double-double
BETA_FLOOR = 2.0 ** (-DD_BITS + 16)


def alpha_constants(alpha):
    """Double-double pairs for alpha, 1 - alpha and 1 - max(alpha, 1 - alpha)."""
    if isinstance(alpha, (int, float, Fraction, np.floating)):
        a = Fraction(alpha)
        abar = max(a, 1 - a)
        return to_dd(a) + to_dd(1 - a) + to_dd(1 - abar)
    import mpmath
    with mpmath.workprec(256):
        a = mpmath.mpf(alpha)
        abar = max(a, 1 - a)
        return to_dd(a) + to_dd(1 - a) + to_dd(1 - abar)


# ---------------------------------------------------------------------------
# series kernel (Wilton, Brjuno, alternating q-series)


@jitable
def _series_one(xh, xl, omh, oml, ombh, ombl, tol, kmax, mode, unfolded, beta_floor):
    if unfolded:
        zh, zl = dd_add(xh, xl, omh, oml)
        f = dd_floor(zh, zl)
        xh, xl = dd_add(xh, xl, -f, 0.0)
        xh, xl = dd_abs(xh, xl)
    zh, zl = dd_add(xh, xl, ombh, ombl)
    a0 = dd_floor(zh, zl)
    dh, dl = dd_add(xh, xl, -a0, 0.0)
    eps = 1.0
    if dh < 0.0:
        eps = -1.0
    yh, yl = dd_abs(dh, dl)

    fixed = tol <= 0.0
    total = 0.0
    sign = 1.0
    beta = 1.0
    q_prev = 0.0
    q = 1.0
    err = np.inf
    flag = FLAG_KMAX
    kused = -1
    for j in range(kmax + 1):
        if yh == 0.0:
            flag = FLAG_ZERO
            err = np.inf
            break
        rh, rl = dd_div(1.0, 0.0, yh, yl)
        zh, zl = dd_add(rh, rl, omh, oml)
        a = dd_floor(zh, zl)
        dh, dl = dd_add(rh, rl, -a, 0.0)
        eps_next = 1.0
        if dh < 0.0:
            eps_next = -1.0
        nh, nl = dd_abs(dh, dl)

        if mode == MODE_QSERIES:
            q_next = a * q + eps * q_prev
            total += sign * np.log(q_next) / q
            q_prev = q
            q = q_next
            scale = 1.0 / q
            bound = (1.0 + np.log(q)) / q
            if nh > 0.0:
                bound += abs(dd_log(nh, nl)) / q
        else:
            total += sign * beta * (-dd_log(yh, yl))
            beta = beta * yh
            scale = beta
            bound = beta
            if nh > 0.0:
                bound = beta * (1.0 + abs(dd_log(nh, nl)))
        if mode != MODE_BRJUNO:
            sign = -sign
        kused = j
        eps = eps_next
        yh = nh
        yl = nl
        if fixed:
            err = bound
            if j == kmax:
                flag = FLAG_OK
            continue
        if yh == 0.0:
            flag = FLAG_ZERO
            err = np.inf
            break
        err = bound
        if bound < tol:
            flag = FLAG_OK
            break
        if scale < beta_floor:
            flag = FLAG_PRECISION
            break
    return total, err, kused, flag


@njit
def _series_loop(xh, xl, omh, oml, ombh, ombl, tol, kmax, mode, unfolded, beta_floor,
                 out_val, out_err, out_k, out_flag):
    for i in range(xh.shape[0]):
        v, e, k, f = _series_one(xh[i], xl[i], omh, oml, ombh, ombl, tol, kmax, mode,
                                 unfolded, beta_floor)
        out_val[i] = v
        out_err[i] = e
        out_k[i] = k
        out_flag[i] = f


def _series_numpy(xh, xl, omh, oml, ombh, ombl, tol, kmax, mode, unfolded, beta_floor):
    n = xh.shape[0]
    out_val = np.zeros(n)
    out_err = np.full(n, np.inf)
    out_k = np.full(n, -1, dtype=np.int64)
    out_flag = np.full(n, FLAG_KMAX, dtype=np.int64)

    xh = xh.astype(np.float64).copy()
    xl = xl.astype(np.float64).copy()
    if unfolded:
        zh, zl = dd_add(xh, xl, omh, oml)
        f = dd_floor(zh, zl)
        xh, xl = dd_add(xh, xl, -f, 0.0 * f)
        xh, xl = dd_abs(xh, xl)
    zh, zl = dd_add(xh, xl, ombh, ombl)
    a0 = dd_floor(zh, zl)
    dh, dl = dd_add(xh, xl, -a0, 0.0 * a0)
    eps = np.where(dh < 0.0, -1.0, 1.0)
    yh, yl = dd_abs(dh, dl)

    fixed = tol <= 0.0
    idx = np.arange(n)
    total = np.zeros(n)
    sign = np.ones(n)
    beta = np.ones(n)
    q_prev = np.zeros(n)
    q = np.ones(n)
    err = np.full(n, np.inf)

    def retire(mask, flag):
        sel = idx[mask]
        out_val[sel] = total[mask]
        out_err[sel] = np.inf if flag == FLAG_ZERO else err[mask]
        out_flag[sel] = flag

    with np.errstate(divide="ignore", invalid="ignore"):
        for j in range(kmax + 1):
            if idx.size == 0:
                break
            zero = yh == 0.0
            if zero.any():
                retire(zero, FLAG_ZERO)
                keep = ~zero
                idx, yh, yl, eps, total, sign, beta, q_prev, q, err = (
                    v[keep] for v in (idx, yh, yl, eps, total, sign, beta, q_prev, q, err))
                if idx.size == 0:
                    break
            rh, rl = dd_div(1.0, 0.0, yh, yl)
            zh, zl = dd_add(rh, rl, omh, oml)
            a = dd_floor(zh, zl)
            dh, dl = dd_add(rh, rl, -a, 0.0 * a)
            eps_next = np.where(dh < 0.0, -1.0, 1.0)
            nh, nl = dd_abs(dh, dl)
            nz = nh > 0.0
            lognext = np.where(nz, np.abs(dd_log(np.where(nz, nh, 1.0), nl)), 0.0)

            if mode == MODE_QSERIES:
                q_next = a * q + eps * q_prev
                total = total + sign * np.log(q_next) / q
                q_prev = q
                q = q_next
                scale = 1.0 / q
                err = (1.0 + np.log(q) + lognext) / q
            else:
                total = total + sign * beta * (-dd_log(yh, yl))
                beta = beta * yh
                scale = beta
                err = beta * (1.0 + lognext)
            if mode != MODE_BRJUNO:
                sign = -sign
            out_k[idx] = j
            eps = eps_next
            yh = nh
            yl = nl
            if fixed:
                if j == kmax:
                    retire(np.ones(idx.size, dtype=bool), FLAG_OK)
                    idx = idx[:0]
                continue
            hit = yh == 0.0
            conv = (~hit) & (err < tol)
            prec = (~hit) & (~conv) & (scale < beta_floor)
            for mask, flag in ((hit, FLAG_ZERO), (conv, FLAG_OK), (prec, FLAG_PRECISION)):
                if mask.any():
                    retire(mask, flag)
            keep = ~(hit | conv | prec)
            idx, yh, yl, eps, total, sign, beta, q_prev, q, err = (
                v[keep] for v in (idx, yh, yl, eps, total, sign, beta, q_prev, q, err))
        if idx.size:
            retire(np.ones(idx.size, dtype=bool), FLAG_KMAX)
    return out_val, out_err, out_k, out_flag


def series_batch(x_hi, x_lo, alpha, tol, kmax, mode=MODE_WILTON, unfolded=False, backend=None):
    """Evaluate one of the three series at many points.

    ``tol <= 0`` requests the fixed partial sum over indices ``0..kmax``;
    otherwise summation stops at the first index whose tail bound drops below
    ``tol``.  Returns ``(value, err_est, k_used, flag)`` arrays.
    """
    x_hi = np.ascontiguousarray(x_hi, dtype=np.float64)
    x_lo = np.ascontiguousarray(x_lo, dtype=np.float64)
    _, _, omh, oml, ombh, ombl = alpha_constants(alpha)
    args = (omh, oml, ombh, ombl, float(tol), int(kmax), int(mode), bool(unfolded), BETA_FLOOR)
    if backend_name(backend) == "numba":
        n = x_hi.shape[0]
        val = np.empty(n)
        err = np.empty(n)
        k = np.empty(n, dtype=np.int64)
        flag = np.empty(n, dtype=np.int64)
        _series_loop(x_hi, x_lo, *args, val, err, k, flag)
        return val, err, k, flag
    return _series_numpy(x_hi, x_lo, *args)


# ---------------------------------------------------------------------------
# log q_k growth along float64 orbits (entropy)


@njit
def _logq_loop(x0, alpha, k, out_logq, out_ok):
    oma = 1.0 - alpha
    for i in range(x0.shape[0]):
        x = x0[i]
        lq = 0.0
        r = 0.0
        eps = 1.0
        good = True
        for _ in range(k):
            inv = 1.0 / x
            a = math.floor(inv + oma)
            d = inv - a
            ratio = a + eps * r
            lq += math.log(ratio)
            r = 1.0 / ratio
            eps = 1.0 if d >= 0.0 else -1.0
            x = abs(d)
            if x == 0.0:
                good = False
                break
        out_logq[i] = lq
        out_ok[i] = good


def _logq_numpy(x0, alpha, k):
    oma = 1.0 - alpha
    x = x0.astype(np.float64).copy()
    lq = np.zeros_like(x)
    r = np.zeros_like(x)
    eps = np.ones_like(x)
    ok = np.ones(x.shape, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(k):
            inv = 1.0 / x
            a = np.floor(inv + oma)
            d = inv - a
            ratio = a + eps * r
            lq = np.where(ok, lq + np.log(ratio), lq)
            r = 1.0 / ratio
            eps = np.where(d >= 0.0, 1.0, -1.0)
            x = np.where(ok, np.abs(d), 0.5)
            dead = ok & (x == 0.0)
            if dead.any():
                ok &= ~dead
                x = np.where(ok, x, 0.5)
    return lq, ok


def logq_batch(x0, alpha, k, backend=None):
    """``log q_k`` after ``k`` folded steps from each start; second array flags survivors."""
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    if backend_name(backend) == "numba":
        lq = np.empty_like(x0)
        ok = np.empty(x0.shape, dtype=np.bool_)
        _logq_loop(x0, float(alpha), int(k), lq, ok)
        return lq, ok
    return _logq_numpy(x0, float(alpha), int(k))


# ---------------------------------------------------------------------------
# orbit occupation histograms


_RESTART = 0.41421356237309515  # sqrt(2) - 1; restart point after an exact zero


@njit
def _hist_loop(x0, alpha, abar, steps, bins, counts):
    oma = 1.0 - alpha
    restarts = 0
    for b in range(x0.shape[0]):
        x = x0[b]
        for _ in range(steps):
            i = int(x / abar * bins)
            if i >= bins:
                i = bins - 1
            counts[b, i] += 1
            inv = 1.0 / x
            x = abs(inv - math.floor(inv + oma))
            if x == 0.0:
                x = _RESTART * abar
                restarts += 1
    return restarts


def _hist_numpy(x0, alpha, abar, steps, bins):
    oma = 1.0 - alpha
    nb = x0.shape[0]
    x = x0.astype(np.float64).copy()
    counts = np.zeros((nb, bins), dtype=np.int64)
    rows = np.arange(nb) * bins
    flat = counts.reshape(-1)
    restarts = 0
    for _ in range(steps):
        i = np.minimum((x / abar * bins).astype(np.int64), bins - 1)
        flat += np.bincount(rows + i, minlength=nb * bins)
        inv = 1.0 / x
        x = np.abs(inv - np.floor(inv + oma))
        z = x == 0.0
        if z.any():
            restarts += int(z.sum())
            x[z] = _RESTART * abar
    return counts, restarts


def orbit_histogram(x0, alpha, steps, bins, backend=None):
    """Per-orbit bin counts over ``[0, abar]`` for ``steps`` iterates of each start."""
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    alpha = float(alpha)
    abar = max(alpha, 1.0 - alpha)
    if backend_name(backend) == "numba":
        counts = np.zeros((x0.shape[0], int(bins)), dtype=np.int64)
        restarts = _hist_loop(x0, alpha, abar, int(steps), int(bins), counts)
        return counts, int(restarts)
    return _hist_numpy(x0, alpha, abar, int(steps), int(bins))
