import math
from fractions import Fraction

import numpy as np
import pytest

from alphawilton.exact import DomainError
from alphawilton.singularity import (NotTypeA, ProbeRow, average_probe, bmo_witness, classify, probe_pattern,
                                     transported)

F = Fraction


@pytest.mark.parametrize("xi,alpha,kind", [
    (F(1, 3), F(1, 3), "A"), (F(2, 5), F(2, 5), "B"), (F(2, 3), F(2, 3), "A"), (F(3, 8), F(3, 8), "A"),
    (0, F(1, 2), "B"), (0, 1, "A"),
])
def test_classify_known_points(xi, alpha, kind):
    assert str(classify(xi, alpha)) == kind


def test_regular_points_carry_a_sign():
    st = classify(F(3, 7), F(1, 2))
    assert st.kind == "B" and st.provenance == "regular" and st.sign in "+-"


def test_float_alpha_collision_is_only_a_warning():
    with pytest.warns(RuntimeWarning):
        st = classify(F(1, 2), 0.5)
    assert st.provenance == "regular"
    assert classify(F(1, 2), F(1, 2)).provenance == "matching-parity"


def test_pattern_rules_on_synthetic_rows():
    grow_b = [ProbeRow(h, -math.log(h), -math.log(h)) for h in (4e-3, 2e-3, 1e-3)]
    grow_a = [ProbeRow(h, -math.log(h), math.log(h)) for h in (4e-3, 2e-3, 1e-3)]
    assert probe_pattern(grow_b, "B") and not probe_pattern(grow_b, "A")
    assert probe_pattern(grow_a, "A") and not probe_pattern(grow_a, "B")
    assert not probe_pattern(grow_a, "A", floor=10)
    flat = [ProbeRow(h, 1.0, 1.0) for h in (4e-3, 2e-3, 1e-3)]
    assert not probe_pattern(flat, "B", floor=None)


def test_probe_on_log_prototype():
    # -log|x| is the model B singularity, sign(x) log|x| the model A one
    rows = average_probe(xi=0.0, func=lambda t: -np.log(np.abs(t)))
    for r in rows:
        assert r.right == pytest.approx(1 - math.log(r.h), rel=1e-6)
    assert probe_pattern(rows, "B", floor=5.0)
    rows = average_probe(xi=0.0, func=lambda t: np.sign(t) * np.log(np.abs(t)))
    assert probe_pattern(rows, "A", floor=None)


@pytest.mark.parametrize("alpha,xi,kind", [(F(1, 3), F(1, 3), "A"), (F(2, 5), F(2, 5), "B"),
                                            (F(1, 2), 0, "B"), (1, 0, "A")])
def test_probes_match_classification(alpha, xi, kind):
    rows = average_probe(alpha, xi)
    assert probe_pattern(rows, kind, floor=None)
    assert not probe_pattern(rows, "A" if kind == "B" else "B", floor=None)


def test_probe_scale_validation():
    with pytest.raises(DomainError):
        average_probe(F(1, 2), 0, scales=(1e-3, 2e-3))
    with pytest.raises(DomainError):
        average_probe(F(1, 2), 0, scales=(1e-6, 1e-7))


@pytest.mark.parametrize("alpha", [F(1, 3), F(2, 3), F(3, 8)])
def test_witness_at_type_a_points(alpha):
    w = bmo_witness(alpha, alpha)
    assert w.x_minus < float(alpha) < w.x_plus
    assert w.x_plus - w.x_minus <= 2 * w.epsilon
    assert w.normalized < 1e-3
    assert abs(w.check_integral) / (w.x_plus - w.x_minus) < 1e-2


def test_witness_refused_at_type_b_point():
    with pytest.raises(NotTypeA):
        bmo_witness(F(2, 5), F(2, 5))


def test_transport_reproduces_b_pattern():
    g, lf = transported(F(2, 5))
    rows = average_probe(xi=float(lf.alpha), func=g)
    assert probe_pattern(rows, "B", floor=None)
