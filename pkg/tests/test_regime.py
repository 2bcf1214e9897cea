import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sterngerlach.regime import (MEASURING, NON_RESOLVING, TRANSITION, ParameterPoint, Thresholds,
                                 classify, evaluate_point, scan)

BASE = ParameterPoint(epsilon=0.5, sigma=1.0, mass=1.0, lam=1.0, magnet_length=20.0, velocity=5.0)


def test_zero_field_point():
    rep = evaluate_point(replace(BASE, epsilon=0.0))
    assert rep.bohm_number == 0.0 and rep.separation_ratio == 0.0
    assert rep.label == NON_RESOLVING


def test_reference_point():
    rep = evaluate_point(BASE)
    assert rep.exit_time == 4.0
    assert rep.separation_ratio == pytest.approx(8 / (2 * math.sqrt(8.5)), rel=1e-12)
    assert rep.separation_ratio == pytest.approx(1.372, abs=1e-3)
    assert rep.bohm_number == pytest.approx(2 * math.sqrt(2), rel=1e-12)


def test_epsilon_scaling():
    a = evaluate_point(BASE)
    b = evaluate_point(replace(BASE, epsilon=5.0))
    assert b.bohm_number == pytest.approx(10 * a.bohm_number, rel=1e-12)
    assert b.separation_ratio == pytest.approx(10 * a.separation_ratio, rel=1e-12)


@pytest.mark.parametrize("B,S,V,label", [
    (100, 10, 1e-4, MEASURING),
    (0.01, 5, 0.0, NON_RESOLVING),
    (1, 1, 0.3, TRANSITION),
    (50, 0.1, 0.0, NON_RESOLVING),
    (50, 5, 0.5, TRANSITION),
])
def test_classify(B, S, V, label):
    assert classify(B, S, V) == label


def test_classify_configurable():
    assert classify(5, 5, 0.0, Thresholds(b_hi=4)) == MEASURING


@given(B=st.floats(0, 1e3), S=st.floats(0, 1e3), V=st.floats(0, 1))
def test_classify_pure_and_scale_free(B, S, V):
    label = classify(B, S, V)
    assert label in (MEASURING, TRANSITION, NON_RESOLVING)
    assert classify(B, S, V) == label


def test_scan_singleton_and_order():
    assert scan([BASE]) == [evaluate_point(BASE)]
    pts = [replace(BASE, epsilon=e, velocity=v) for e in (0.1, 0.5, 2.0) for v in (1.0, 5.0, 10.0)]
    serial = scan(pts)
    parallel = scan(pts, workers=4)
    assert serial == parallel and len(serial) == 9
    for j in range(3):
        Bs = [serial[3 * i + j].bohm_number for i in range(3)]
        assert Bs[0] < Bs[1] < Bs[2]


def test_scan_records_errors():
    reps = scan([replace(BASE, velocity=0.0), BASE])
    assert reps[0].error and reps[0].label == ""
    assert reps[1].error == "" and reps[1].label


def test_log_sweep_crosses_each_label_once():
    pts = [replace(BASE, epsilon=float(e)) for e in np.geomspace(1e-3, 1e2, 61)]
    labels = [r.label for r in scan(pts)]
    runs = [l for i, l in enumerate(labels) if i == 0 or labels[i - 1] != l]
    assert runs == [NON_RESOLVING, TRANSITION, MEASURING]


@given(e1=st.floats(0.001, 10), factor=st.floats(1.0, 10), l=st.floats(1, 50), v=st.floats(1, 10))
def test_monotone_in_epsilon_and_time(e1, factor, l, v):
    p = replace(BASE, epsilon=e1, magnet_length=l, velocity=v)
    a = evaluate_point(p)
    b = evaluate_point(replace(p, epsilon=e1 * factor))
    c = evaluate_point(replace(p, magnet_length=l * factor))
    assert b.bohm_number >= a.bohm_number and b.separation_ratio >= a.separation_ratio
    assert c.bohm_number >= a.bohm_number and c.separation_ratio >= a.separation_ratio
