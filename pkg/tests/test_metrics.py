import math
import statistics

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import confusion_matrix, precision_recall_fscore_support

from ecocneat.ensemble import Prediction
from ecocneat.metrics import (
    complexity,
    mean_ci,
    rejection_curve,
    rejection_curve_arrays,
    repetition_stats,
    score,
)
from ecocneat.neat import ConnGene, Genome, NodeGene


def label_pairs(max_k=8, max_n=60):
    return st.integers(2, max_k).flatmap(
        lambda k: st.tuples(
            st.just(k),
            st.integers(1, max_n).flatmap(
                lambda n: st.tuples(
                    st.lists(st.integers(0, k - 1), min_size=n, max_size=n),
                    st.lists(st.integers(0, k - 1), min_size=n, max_size=n),
                )
            ),
        )
    )


@settings(max_examples=150, deadline=None)
@given(label_pairs())
def test_scores_match_sklearn(case):
    k, (pred, truth) = case
    rep = score(pred, truth, k)
    labels = list(range(k))
    np.testing.assert_array_equal(rep.confusion.counts, confusion_matrix(truth, pred, labels=labels))
    p, r, f, s = precision_recall_fscore_support(truth, pred, labels=labels, zero_division=0)
    np.testing.assert_allclose([c.precision for c in rep.per_class], p, atol=1e-12)
    np.testing.assert_allclose([c.recall for c in rep.per_class], r, atol=1e-12)
    np.testing.assert_allclose([c.f1 for c in rep.per_class], f, atol=1e-12)
    for avg in ("micro", "macro", "weighted"):
        ap, ar, af, _ = precision_recall_fscore_support(truth, pred, labels=labels, average=avg, zero_division=0)
        got = getattr(rep, avg)
        assert got.precision == pytest.approx(ap, abs=1e-12)
        assert got.recall == pytest.approx(ar, abs=1e-12)
        assert got.f1 == pytest.approx(af, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(label_pairs())
def test_micro_f1_and_weighted_recall_equal_accuracy(case):
    k, (pred, truth) = case
    rep = score(pred, truth, k)
    acc = float(np.mean(np.array(pred) == np.array(truth)))
    assert abs(rep.micro.f1 - acc) <= 1e-12
    assert abs(rep.weighted.recall - acc) <= 1e-12
    assert abs(rep.accuracy - acc) <= 1e-12


def test_undefined_classes_are_flagged():
    rep = score([0, 0, 0], [0, 1, 0], 3)
    assert rep.undefined_precision == [1, 2]
    assert rep.undefined_recall == [2]
    assert rep.per_class[2].f1 == 0.0


def test_score_input_checks():
    with pytest.raises(ValueError):
        score([0, 1], [0], 2)
    with pytest.raises(ValueError):
        score([], [], 2)
    with pytest.raises(ValueError):
        score([0, 3], [0, 1], 2)


def test_report_serialisation():
    rep = score([0, 1, 1, 2], [0, 1, 2, 2], 3)
    csv_text = rep.to_csv(["a", "b", "c"])
    lines = csv_text.strip().splitlines()
    assert lines[0] == "class,precision,recall,f1,support"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["a", "b", "c", "micro", "macro", "weighted"]
    d = rep.to_dict()
    assert d["confusion"] == [[1, 0, 0], [0, 1, 0], [0, 1, 1]]
    assert d["accuracy"] == 0.75


def brute_rejection(conf, ok, r):
    n = len(conf)
    order = sorted(range(n), key=lambda i: -conf[i])  # sorted() is stable
    kept = max(1, math.ceil(round((1 - r) * n, 9)))
    return sum(ok[i] for i in order[:kept]) / kept


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.tuples(st.integers(0, 5), st.booleans()), min_size=1, max_size=50),
    st.lists(st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.9, 0.95, 1.0]), min_size=1, max_size=7),
)
def test_rejection_curve_matches_brute_force(samples, grid):
    conf = [float(c) for c, _ in samples]
    ok = [b for _, b in samples]
    curve = rejection_curve_arrays(conf, ok, grid)
    for (r, acc), g in zip(curve.points, grid):
        assert r == g
        assert acc == pytest.approx(brute_rejection(conf, ok, g))


def test_rejection_curve_from_predictions():
    preds = [Prediction(0, 3.0, None), Prediction(1, 1.0, None), Prediction(2, 2.0, None), Prediction(0, 0.0, None)]
    truth = [0, 0, 2, 0]
    curve = rejection_curve(preds, truth, [0.0, 0.5, 0.75])
    assert curve.points == [(0.0, 0.75), (0.5, 1.0), (0.75, 1.0)]
    with pytest.raises(ValueError):
        rejection_curve(preds, truth[:2], [0.0])
    with pytest.raises(ValueError):
        rejection_curve(preds, truth, [1.5])


def test_rejection_at_zero_is_accuracy():
    rng = np.random.default_rng(0)
    ok = rng.random(100) < 0.6
    curve = rejection_curve_arrays(rng.random(100), ok, [0.0])
    assert curve.points[0][1] == ok.mean()


def test_complexity_counts():
    g = Genome(3, 2, {3: NodeGene(0, "sigmoid"), 4: NodeGene(0, "sigmoid"), 5: NodeGene(0, "tanh")},
               {(0, 5): ConnGene(1, True), (5, 4): ConnGene(1, True), (1, 3): ConnGene(1, False)})
    rep = complexity([g, g])
    assert rep.total_nodes == 12
    assert rep.total_nodes_no_inputs == 6
    assert rep.total_connections == 4
    assert rep.mean_connections == 2
    assert rep.to_dict()["classifiers"] == 2


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=30))
def test_repetition_stats_population_variance(vals):
    m, v = repetition_stats(vals)
    assert m == pytest.approx(statistics.fmean(vals), abs=1e-12)
    assert v == pytest.approx(statistics.pvariance(vals), abs=1e-12)
    centre, lo, hi = mean_ci(vals)
    assert lo <= centre <= hi
