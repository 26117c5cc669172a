import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_metrics, recount
from underest.metrics import (
    BiasReport,
    ConfusionMatrix,
    MetricError,
    accuracy,
    bias_report,
    confusion,
    cv_score,
    disparate_impact,
    underestimation,
    underestimation_group,
)


def as_float(v):
    return None if v is None else float(v)


def test_confusion_enumeration():
    cm = confusion([1, 1, 0, 0], [1, 0, 1, 0])
    assert (cm.tp, cm.fn, cm.fp, cm.tn) == (1, 1, 1, 1)


def test_confusion_identity():
    y = [1, 0, 1, 1, 0]
    cm = confusion(y, y)
    assert cm.fn == 0 and cm.fp == 0


def test_confusion_matches_recount_on_random_pairs():
    rng = np.random.default_rng(11)
    t = rng.integers(0, 2, 1000)
    p = rng.integers(0, 2, 1000)
    cm = confusion(t, p)
    assert (cm.tp, cm.fp, cm.fn, cm.tn) == recount(t, p)


def test_confusion_mask_and_errors():
    cm = confusion([1, 0, 1], [1, 1, 0], mask=[1, 0, 1])
    assert (cm.tp, cm.fp, cm.fn, cm.tn) == (1, 0, 1, 0)
    with pytest.raises(MetricError):
        confusion([1, 0], [1])
    with pytest.raises(MetricError):
        confusion([1, 0], [1, 0], mask=[0, 0])
    with pytest.raises(MetricError):
        confusion([1, 2], [1, 0])


def test_derived_counts():
    cm = ConfusionMatrix(tp=40, fp=10, fn=20, tn=30)
    assert (cm.actual_pos, cm.predicted_pos, cm.actual_neg, cm.predicted_neg) == (60, 50, 40, 50)


def test_accuracy():
    assert accuracy(ConfusionMatrix(1, 1, 1, 1)) == 0.5
    assert accuracy(ConfusionMatrix(5, 0, 0, 7)) == 1.0
    # denominator is the full count: TN enters once, FN once
    assert accuracy(ConfusionMatrix(tp=3, fp=1, fn=2, tn=4)) == 0.7


def test_underestimation_examples():
    assert underestimation(ConfusionMatrix(tp=40, fp=10, fn=20, tn=30)) == pytest.approx(50 / 60)
    assert underestimation(ConfusionMatrix(tp=9, fp=0, fn=0, tn=3)) == 1.0
    assert underestimation(ConfusionMatrix(tp=0, fp=0, fn=6, tn=4)) == 0.0
    assert underestimation(ConfusionMatrix(tp=0, fp=3, fn=0, tn=4)) is None


def test_underestimation_group_female_example():
    # 100 minority rows, 11 actual positives, model predicts 6 positives
    y = np.zeros(100, dtype=int)
    y[:11] = 1
    p = np.zeros(100, dtype=int)
    p[:6] = 1
    mask = np.ones(100, dtype=int)
    assert underestimation_group(y, p, mask) == pytest.approx(6 / 11)
    assert round(6 / 11, 3) == 0.545


def test_underestimation_group_identity_and_undefined():
    y = np.array([1, 0, 1, 0, 1])
    m = np.array([1, 1, 0, 0, 1])
    assert underestimation_group(y, y, m) == 1.0
    assert underestimation_group(np.array([0, 0, 1]), np.array([1, 0, 1]), np.array([1, 1, 0])) is None


def test_underestimation_group_composition():
    rng = np.random.default_rng(5)
    for _ in range(50):
        t, p, m = (rng.integers(0, 2, 40) for _ in range(3))
        sel = m.astype(bool)
        expected = underestimation(confusion(t[sel], p[sel])) if sel.any() else None
        assert underestimation_group(t, p, m) == expected


def test_cv_examples():
    # majority: 4/10 predicted positive, minority: 3/10
    pred = np.array([1] * 4 + [0] * 6 + [1] * 3 + [0] * 7)
    mask = np.array([0] * 10 + [1] * 10)
    assert cv_score(pred, mask) == pytest.approx(0.1)
    assert cv_score(np.array([1, 0, 1, 0]), np.array([0, 0, 1, 1])) == 0.0
    assert cv_score(np.array([1, 0]), np.array([0, 0])) is None


def test_cv_recount():
    rng = np.random.default_rng(3)
    p = rng.integers(0, 2, 500)
    m = rng.integers(0, 2, 500)
    maj = [p[i] for i in range(500) if not m[i]]
    mino = [p[i] for i in range(500) if m[i]]
    expected = Fraction(int(sum(maj)), len(maj)) - Fraction(int(sum(mino)), len(mino))
    assert cv_score(p, m) == float(expected)


def test_disparate_impact_examples():
    pred = np.array([1] * 4 + [0] * 6 + [1] * 3 + [0] * 7)
    mask = np.array([0] * 10 + [1] * 10)
    ratio, ok = disparate_impact(pred, mask)
    assert ratio == pytest.approx(0.75) and ok is False
    ratio, ok = disparate_impact(np.array([1, 0, 1, 0]), np.array([0, 0, 1, 1]))
    assert ratio == 1.0 and ok is True


def test_disparate_impact_boundary_inclusive():
    # minority 8/25 = 0.32, majority 2/5 = 0.40
    pred = np.array([1] * 2 + [0] * 3 + [1] * 8 + [0] * 17)
    mask = np.array([0] * 5 + [1] * 25)
    ratio, ok = disparate_impact(pred, mask)
    assert ratio == 0.8 and ok is True


def test_disparate_impact_zero_majority_rate():
    assert disparate_impact(np.array([0, 0, 1]), np.array([0, 0, 1])) == (None, None)


def test_bias_report_perfect_predictor():
    y = np.array([1, 0, 1, 0, 0, 1, 0, 0])
    m = np.array([0, 0, 0, 0, 1, 1, 1, 1])
    r = bias_report(y, y, m)
    assert (r.accuracy, r.us, r.us_s) == (1.0, 1.0, 1.0)
    assert r.cv == cv_score(y, m)


def test_bias_report_constant_positive():
    y = np.array([1, 0, 0, 0, 1, 0])
    r = bias_report(y, np.ones(6, dtype=int), np.array([0, 0, 0, 1, 1, 1]))
    assert r.us == 6 / 2


def test_bias_report_composition_and_decomposition():
    rng = np.random.default_rng(8)
    for _ in range(30):
        t, p, m = (rng.integers(0, 2, 60) for _ in range(3))
        r = bias_report(t, p, m)
        assert r.accuracy == accuracy(confusion(t, p))
        assert r.us == underestimation(confusion(t, p))
        assert r.us_s == underestimation_group(t, p, m)
        assert r.cv == cv_score(p, m)
        assert (r.di_s, r.di_pass_80) == disparate_impact(p, m)
        assert r.minority_cm + r.majority_cm == r.overall_cm


def test_bias_report_json_roundtrip():
    r = bias_report([1, 0, 1, 0], [1, 1, 0, 0], [1, 0, 1, 0])
    d = r.to_dict()
    assert list(d)[:6] == ["accuracy", "us", "us_s", "cv", "di_s", "di_pass_80"]
    assert BiasReport.from_dict(d) == r


def _check_against_oracle(t, p, m):
    r = bias_report(t, p, m)
    o = naive_metrics(t, p, m)
    assert r.accuracy == float(o["accuracy"])
    assert r.us == as_float(o["us"])
    assert r.us_s == as_float(o["us_s"])
    assert r.cv == as_float(o["cv"])
    assert r.di_s == as_float(o["di_s"])
    assert r.di_pass_80 == o["di_pass_80"]
    cm = r.overall_cm
    assert (cm.tp, cm.fp, cm.fn, cm.tn) == o["overall"]
    cm = r.minority_cm
    assert (cm.tp, cm.fp, cm.fn, cm.tn) == o["minority"]
    cm = r.majority_cm
    assert (cm.tp, cm.fp, cm.fn, cm.tn) == o["majority"]


def test_exhaustive_length_four():
    for bits in itertools.product((0, 1), repeat=12):
        t, p, m = list(bits[:4]), list(bits[4:8]), list(bits[8:])
        _check_against_oracle(t, p, m)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 60).flatmap(
    lambda n: st.tuples(*(st.lists(st.integers(0, 1), min_size=n, max_size=n) for _ in range(3)))))
def test_property_oracle(vectors):
    _check_against_oracle(*vectors)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=50),
       st.randoms(use_true_random=False))
def test_us_invariant_under_prediction_permutation_within_class(pairs, rnd):
    t = np.array([a for a, _ in pairs])
    p = np.array([b for _, b in pairs])
    q = p.copy()
    for cls in (0, 1):
        idx = np.flatnonzero(t == cls)
        perm = list(idx)
        rnd.shuffle(perm)
        q[idx] = p[perm]
    assert underestimation(confusion(t, p)) == underestimation(confusion(t, q))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1), st.integers(0, 1)),
                min_size=1, max_size=50))
def test_us_bounds(rows):
    t = [a for a, _, _ in rows]
    p = [b for _, b, _ in rows]
    cm = confusion(t, p)
    us = underestimation(cm)
    if us is not None:
        assert 0 <= us <= cm.total / cm.actual_pos
        if cm.fp == cm.fn:
            assert us == 1.0
