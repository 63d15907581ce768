"""The eleven acceptance criteria, one test (and one summary line) each.

Run ``pytest tests/test_acceptance.py -v -s`` to see the lines as they are
produced; they are also collected into the terminal summary.
"""
import math
import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from alphawilton import cli
from alphawilton.alpha_cf import contraction_regime, digit_matrices, orbit, unfolded_expansion
from alphawilton.matching import (FLIP, SHIFT, exponents_from_pseudocenter, find_matching_exponents,
                                  pseudocenter_check)
from alphawilton.singularity import NotTypeA, average_probe, bmo_witness, classify, probe_pattern
from alphawilton.sync import (EDGES, diff_series_25, in_sync_range, monitors, supnorm_scan, sync_trace,
                              validate_trace)
from alphawilton.wilton import integral_near_zero, wilton_eval
from alphawilton.entropy import constancy_report, entropy_estimate

G = (math.sqrt(5) - 1) / 2


def rationals_up_to(qmax):
    return sorted({Fraction(p, q) for q in range(2, qmax + 1) for p in range(1, q)})


# 1 ---------------------------------------------------------------------------


def test_c1_matching_agrees_with_pseudocenter_rule(record):
    spots = {Fraction(2, 5): (2, 2), Fraction(1, 3): (1, 2), Fraction(3, 8): (2, 3), Fraction(2, 3): (1, 0)}
    bad = []
    centers = [r for r in rationals_up_to(60) if pseudocenter_check(r)]
    for r in centers:
        d = find_matching_exponents(r)
        if not d or (d.n, d.m) != exponents_from_pseudocenter(r):
            bad.append(r)
    for r, nm in spots.items():
        d = find_matching_exponents(r)
        if (d.n, d.m) != nm:
            bad.append(r)
    record(1, not bad, f"{len(centers)} pseudocenters with q <= 60 and 4 spot values; mismatches: {bad}")
    assert not bad


# 2 ---------------------------------------------------------------------------


def test_c2_matrix_identities(record):
    checked, bad = 0, []
    for r in rationals_up_to(60) + [Fraction(1)]:
        d = find_matching_exponents(r)
        if not d or not d.verified:
            continue
        checked += 1
        # rebuild the products from the digits instead of trusting the stored ones
        P = digit_matrices(unfolded_expansion(r, r)[1])[d.n]
        M = digit_matrices(unfolded_expansion(r - 1, r)[1])[d.m]
        if P != SHIFT @ M @ FLIP or not (P.b == M.b + M.d and P.d == M.d):
            bad.append(r)
    record(2, checked > 1000 and not bad, f"{checked} verified parameters; failures: {bad}")
    assert checked > 1000 and not bad


# 3 ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def orbit_sample():
    rng = random.Random(3)
    regimes = {"golden": [], "silver": [], "small": []}
    while min(len(v) for v in regimes.values()) < 334:
        a = Fraction(rng.randrange(1, 10 ** 4 + 1), 10 ** 4)
        regimes[contraction_regime(a)].append(a)
    out = []
    for name, alphas in regimes.items():
        for a in alphas[:334]:
            x = Fraction(rng.getrandbits(160), 2 ** 160) * 3 - 1
            out.append((name, a, x))
    return out


def test_c3_orbits(orbit_sample, record):
    failures = []
    for name, a, x in orbit_sample:
        try:
            orbit(x, a, 200)  # exact mode asserts every identity and bound
        except AssertionError as e:
            failures.append((a, x, str(e)))
    ok = len(orbit_sample) >= 1000 and not failures
    record(3, ok, f"{len(orbit_sample)} exact orbits over the three contraction regimes; "
                  f"failures: {len(failures)}")
    assert ok, failures[:3]


# 4 ---------------------------------------------------------------------------


def test_c4_functional_equation_and_golden_value(record):
    tol = 1e-8
    rng = np.random.default_rng(4)
    worst = 0.0
    for a in (0.4, 0.5, 0.55):
        abar = max(a, 1 - a)
        for x0 in rng.uniform(0.0, abar, 100):
            w = wilton_eval(x0, a, tol=tol)
            # A(x0) rounded to float64 can land across a discontinuity of W, so
            # it is formed in 256 bits and handed over in double-double
            with mpmath.workprec(256):
                inv = 1 / mpmath.mpf(x0)
                x1 = abs(inv - mpmath.floor(inv + 1 - mpmath.mpf(a)))
                w1 = wilton_eval(x1, a, tol=tol)
            worst = max(worst, abs(w.value + math.log(x0) + x0 * w1.value))
    closed = -math.log(G) / (1 + G)
    with mpmath.workprec(256):
        wg = wilton_eval((mpmath.sqrt(5) - 1) / 2, 1, tol=1e-12).value
    ok = worst <= 3 * tol and abs(wg - closed) <= 1e-6
    record(4, ok, f"max residual {worst:.2e} (bound {3 * tol:.0e}); W_1(g) = {wg:.9f}, "
                  f"closed form {closed:.9f}, literal 0.297404 is off by {abs(closed - 0.297404):.1e}")
    assert ok


# 5 ---------------------------------------------------------------------------


def test_c5_integral_near_zero(record):
    devs = []
    for x in (1e-2, 1e-3, 1e-4):
        val, _ = integral_near_zero(0.5, x, tol=1e-10)
        ref = -x * math.log(x) + x
        devs.append(abs(val - ref) / abs(ref))
    ok = devs[0] > devs[1] > devs[2] and devs[2] < 0.2
    record(5, ok, "relative deviations " + ", ".join(f"{d:.2e}" for d in devs))
    assert ok


# 6 ---------------------------------------------------------------------------


def test_c6_singularity_types(record):
    third, two_fifths = Fraction(1, 3), Fraction(2, 5)
    kinds = (str(classify(third, third)), str(classify(two_fifths, two_fifths)))
    probe_a = probe_pattern(average_probe(third, third), "A", floor=None)
    probe_b = probe_pattern(average_probe(two_fifths, two_fifths), "B", floor=None)
    witnesses = {}
    for a in (third, Fraction(2, 3)):
        w = bmo_witness(a, a)
        witnesses[str(a)] = w.x_minus < float(a) < w.x_plus and w.normalized < 1e-3
    try:
        bmo_witness(two_fifths, two_fifths)
        refused = False
    except NotTypeA:
        refused = True
    ok = kinds == ("A", "B") and probe_a and probe_b and all(witnesses.values()) and refused
    record(6, ok, f"classify {kinds}; probes A={probe_a} B={probe_b}; witnesses {witnesses}; "
                  f"2/5 refused={refused}")
    assert ok


# 7 ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def sync_sample():
    rng = random.Random(7)
    traces = []
    while len(traces) < 10_000:
        a = Fraction(rng.randrange(381_966, 500_001), 10 ** 6)
        if not in_sync_range(a):
            continue
        x = Fraction(rng.getrandbits(200) | 1, 2 ** 200)
        traces.append(sync_trace(x, a, 50, mode="exact"))
    return traces


def test_c7_state_machine(sync_sample, record):
    steps = sum(len(t.steps) for t in sync_sample)
    other, monitor, gap_prev, gap_prime = [], [], [], []
    for t in sync_sample:
        st = t.states
        if st[0] not in "AB" or any((u, v) not in EDGES for u, v in zip(st, st[1:])):
            other.append(t)
        for k, s in enumerate(t.steps):
            if s.state == "B" and s.x < Fraction(1, 2) or s.state == "C" and s.x < Fraction(1, 3):
                other.append(t)
            prev = t.steps[k - 1] if k else None
            if abs(s.q - s.qp) > (prev.q if prev else 0):
                gap_prev.append((t, s.i))
            if abs(s.q - s.qp) > (prev.qp if prev else 0):
                gap_prime.append((t, s.i))
        if not validate_trace(t, q_bound="prime").ok:
            other.append(t)
        if not monitors(t).ok:
            monitor.append(t)
    ok = not (other or monitor or gap_prev or gap_prime)
    detail = (f"{len(sync_sample)} traces, {steps} steps, no NoStateMatch; edge/remark/B-run failures "
              f"{len(other)}, monitor failures {len(monitor)}; |q-q'| <= q_(i-1) violated at "
              f"{len(gap_prev)} steps in {len({id(t) for t, _ in gap_prev})} traces "
              f"(|q-q'| <= q'_(i-1) violated at {len(gap_prime)})")
    record(7, ok, detail)
    # every check that holds mathematically must hold exactly
    assert not (other or monitor or gap_prime)


@pytest.mark.xfail(strict=True, reason="inside C-runs of length >= 2 the gap equals q'_(i-1) > q_(i-1); "
                                       "see validate_trace")
def test_c7_q_gap_bounded_by_previous_q(sync_sample):
    bad = [t for t in sync_sample if not validate_trace(t, q_bound="prev").ok]
    assert not bad


# 8 ---------------------------------------------------------------------------


def test_c8_difference_series(record):
    rng = np.random.default_rng(8)
    worst = -math.inf
    for x in rng.uniform(0.5, 0.6, 100):
        w1 = wilton_eval(x, 0.4, tol=1e-10)
        w2 = wilton_eval(x, 0.5, tol=1e-10)
        d = diff_series_25(x)
        worst = max(worst, abs(d - (w1.value - w2.value)) - (1e-6 + w1.err_est + w2.err_est))
    record(8, worst <= 0, f"max(|error| - allowance) = {worst:.2e}")
    assert worst <= 0


# 9 ---------------------------------------------------------------------------


def test_c9_sup_norm(record):
    main = supnorm_scan(Fraction(2, 5), 10_000, 1e-6)
    others = {a: supnorm_scan(a, 10_000, 1e-6) for a in (0.39, 0.45)}
    finite = all(math.isfinite(r.max_abs) and r.dropped == 0 for r in others.values())
    ok = main.max_abs < 1 and main.dropped == 0 and finite
    record(9, ok, f"alpha=2/5: {main.max_abs:.6f} at x={main.argmax:.5f}; "
           + "; ".join(f"alpha={a}: {r.max_abs:.6f}" for a, r in others.items()))
    assert ok


# 10 --------------------------------------------------------------------------


def test_c10_entropy(record):
    rep = constancy_report([0.39, 0.42, 0.5, 0.58, 0.618], k=10_000, trials=100, seed=10)
    gauss = entropy_estimate(1, 10_000, 100, seed=11).mean
    half = entropy_estimate(0.5, 10_000, 100, seed=12).mean
    g_ref = math.pi ** 2 / (6 * math.log(2))
    h_ref = math.pi ** 2 / (6 * math.log((1 + math.sqrt(5)) / 2))
    ok = (rep.spread <= 0.02 and abs(gauss / g_ref - 1) <= 0.02 and abs(half / h_ref - 1) <= 0.02)
    record(10, ok, f"spread {rep.spread:.2%}; alpha=1 {gauss:.4f} vs {g_ref:.4f}; "
                   f"alpha=1/2 {half:.4f} vs {h_ref:.4f}")
    assert ok


# 11 --------------------------------------------------------------------------


def test_c11_reproducible_output(tmp_path, record):
    commands = [
        ["grid", "--alpha", "2/5", "--a", "0", "--b", "1", "--n", "4096"],
        ["entropy", "--alpha", "0.42,0.5", "--k", "2000", "--trials", "20", "--seed", "5"],
        ["entropy", "--alpha", "1", "--k", "2000", "--trials", "20", "--seed", "5", "--format", "csv"],
        ["matching", "--alpha", "2/5"],
        ["sync", "--alpha", "2/5", "--x", "11/20", "--format", "json"],
        ["diffnorm", "--alpha", "2/5", "--n", "2000"],
    ]
    same = []
    for i, cmd in enumerate(commands):
        blobs = []
        for rep in range(2):
            out = tmp_path / f"{i}_{rep}.txt"
            assert cli.main(cmd + ["--out", str(out)]) == 0
            blobs.append(out.read_bytes())
        same.append(blobs[0] == blobs[1] and b"\r" not in blobs[0])
    record(11, all(same), f"{sum(same)}/{len(same)} commands byte-identical on rerun")
    assert all(same)
