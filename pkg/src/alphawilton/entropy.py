"""Metric entropy of ``A_alpha`` from the growth of ``q_k``, and empirical invariant densities."""
import math
from dataclasses import dataclass
from itertools import combinations
from typing import List

import numpy as np

from . import _kernels as kern
from .exact import DomainError

GAUSS_ENTROPY = math.pi ** 2 / (6 * math.log(2))
NEAREST_ENTROPY = math.pi ** 2 / (6 * math.log((1 + math.sqrt(5)) / 2))

MAX_REDRAWS = 100


@dataclass
class EntropyEstimate:
    alpha: float
    k: int
    trials: int
    mean: float  # nats
    stderr: float
    seed: int
    redrawn: int = 0

    @property
    def reportable(self):
        return self.k >= 1000


def _check_alpha(alpha):
    a = float(alpha)
    if not 0 < a <= 1:
        raise DomainError(f"alpha={alpha} is not in (0, 1]")
    return a


def _streams(seed, n):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def _uniform_start(rng, abar):
    x = 0.0
    while x == 0.0:
        x = rng.uniform(0.0, abar)
    return x


def estimate_samples(alpha, k, trials, seed, backend=None):
    """Per-trial ``2 log q_k / k`` and the number of redrawn trials."""
    a = _check_alpha(alpha)
    if k < 1 or trials < 1:
        raise DomainError("k and trials must be >= 1")
    abar = max(a, 1.0 - a)
    rngs = _streams(seed, trials)
    x0 = np.array([_uniform_start(r, abar) for r in rngs])
    lq, ok = kern.logq_batch(x0, a, k, backend)
    redrawn = 0
    for _ in range(MAX_REDRAWS):
        bad = np.flatnonzero(~ok)
        if not bad.size:
            break
        redrawn += bad.size
        x0[bad] = [_uniform_start(rngs[i], abar) for i in bad]
        lq[bad], ok[bad] = kern.logq_batch(x0[bad], a, k, backend)
    else:
        raise RuntimeError(f"orbits kept terminating at alpha={a}")
    return 2.0 * lq / k, redrawn


def entropy_estimate(alpha, k=10_000, trials=100, seed=0, backend=None):
    """Average of ``2 log q_k / k`` over ``trials`` orbits started uniformly in ``(0, abar)``.

    Every trial has its own substream of ``seed``, so a trial whose orbit dies
    is redrawn without disturbing the others.
    """
    s, redrawn = estimate_samples(alpha, k, trials, seed, backend)
    err = float(np.std(s, ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return EntropyEstimate(float(alpha), int(k), int(trials), float(np.mean(s)), err, seed, redrawn)


@dataclass
class InvariantHistogram:
    alpha: float
    edges: np.ndarray
    mass: np.ndarray  # sums to 1
    stderr: np.ndarray  # from the spread between independent orbits
    restarts: int

    @property
    def density(self):
        return self.mass / np.diff(self.edges)


def invariant_histogram(alpha, n=1_000_000, bins=64, seed=0, orbits=100, backend=None):
    """Occupation masses of ``orbits`` independent orbits with ``n`` iterates in total."""
    a = _check_alpha(alpha)
    if n < 10_000:
        raise DomainError("n must be >= 10^4")
    abar = max(a, 1.0 - a)
    steps = n // orbits
    x0 = np.array([_uniform_start(r, abar) for r in _streams(seed, orbits)])
    counts, restarts = kern.orbit_histogram(x0, a, steps, bins, backend)
    per = counts / steps
    mass = counts.sum(axis=0) / counts.sum()
    stderr = per.std(axis=0, ddof=1) / math.sqrt(orbits)
    return InvariantHistogram(a, np.linspace(0.0, abar, bins + 1), mass, stderr, restarts)


def gauss_bin_masses(edges):
    """Gauss measure of each bin, ``log((1+b)/(1+a)) / log 2``."""
    e = np.asarray(edges, dtype=np.float64)
    return np.diff(np.log1p(e)) / math.log(2)


@dataclass
class ConstancyReport:
    rows: List[EntropyEstimate]
    spread: float  # max pairwise |h_i - h_j| / min(h_i, h_j)


def constancy_report(alpha_list, k=10_000, trials=100, seed=0, backend=None, check_range=True):
    """Entropy at each ``alpha`` with a shared seed and the largest relative deviation."""
    g = (math.sqrt(5) - 1) / 2
    if check_range:
        off = [a for a in alpha_list if not 1 - g - 1e-12 <= float(a) <= g + 1e-12]
        if off:
            raise DomainError(f"alpha values outside [1-g, g]: {off}")
    rows = [entropy_estimate(a, k, trials, seed, backend) for a in alpha_list]
    spread = 0.0
    for r, s in combinations(rows, 2):
        spread = max(spread, abs(r.mean - s.mean) / min(r.mean, s.mean))
    return ConstancyReport(rows, spread)
