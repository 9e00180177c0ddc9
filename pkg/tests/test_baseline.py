import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from corpus import direction_dataset, featurized
from csedkit.baseline import (LinearModel, PairVocab, TrainingDiverged, accuracy_tsv, featurize, grad_check,
                              loss_and_grad, predict, softmax, train)
from csedkit.sampler import PairExample


def _example(t, i, j, label="child"):
    return PairExample(t.text, t[i].char_span, t[j].char_span, "dsp", label, "fixture")


def test_features_by_hand(meeting):
    vocab = PairVocab.build(["NOUN|NOUN", "NOUN|VERB"])
    # 职工 (2) depends on 讨论 (3).
    fv = featurize(_example(meeting, 2, 3), meeting, vocab)
    assert fv[:5].tolist() == [1, 1, 1, 2, 2]
    assert fv[5:].tolist() == [0, 1, 0]
    # 全厂 (1) vs 报告 (7): offset n-1, path 1-2-3-5-7.
    fv = featurize(_example(meeting, 1, 7), meeting, vocab)
    assert fv[:5].tolist() == [6, 4, 0, 2, 2]
    assert fv[5:].tolist() == [1, 0, 0]


def test_unresolvable_span(meeting):
    ex = PairExample(meeting.text, (0, 1), (2, 4), "dsp", "child", "fixture")
    with pytest.raises(ValueError):
        featurize(ex, meeting, PairVocab(()))


def test_softmax_by_hand():
    p = softmax(np.array([0.0, math.log(3.0)]))
    assert p == pytest.approx([0.25, 0.75], abs=1e-12)


@given(arrays(np.float64, (4, 3), elements=st.floats(-50, 50)), st.floats(-100, 100))
def test_softmax_rows_and_shift(scores, c):
    p = softmax(scores)
    assert np.all(np.abs(p.sum(axis=1) - 1) <= 1e-9)
    assert np.allclose(softmax(scores + c), p, atol=1e-9)


def test_zero_epochs_is_uniform():
    X, y, _ = featurized(direction_dataset(10))
    m, history = train(X, y, epochs=0)
    assert not m.weights.any() and len(history) == 1
    label, probs = predict(m, X[0])
    assert probs == pytest.approx([0.5, 0.5]) and label == m.classes[0]


def test_separable_direction_set():
    X, y, _ = featurized(direction_dataset(120, seed=1))
    m, history = train(X, y, lr=0.1, epochs=60, seed=0)
    acc = np.mean([predict(m, x)[0] == lab for x, lab in zip(X, y)])
    assert acc >= 0.99
    assert history[-1] <= history[0]


def test_deterministic():
    X, y, _ = featurized(direction_dataset(30))
    a, _ = train(X, y, epochs=5, seed=4)
    b, _ = train(X, y, epochs=5, seed=4)
    assert np.array_equal(a.weights, b.weights) and np.array_equal(a.bias, b.bias)


def test_full_batch_loss_non_increasing():
    X, y, _ = featurized(direction_dataset(30, seed=2))
    _, history = train(X, y, lr=1e-2, epochs=40, batch=len(y))
    assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))


def test_errors():
    X = np.zeros((3, 2))
    with pytest.raises(ValueError):
        train(X, ["a", "a", "a"])
    with pytest.raises(TrainingDiverged), np.errstate(all="ignore"):
        train(np.array([[1e200, 0.0], [-1e200, 0.0]]), ["a", "b"], lr=1e10, epochs=3)
    m = LinearModel.zeros(("a", "b"), 2)
    with pytest.raises(ValueError):
        predict(m, np.zeros(3))
    with pytest.raises(ValueError):
        grad_check(m, X, np.array([0, 1, 0]), epsilon=0)


def test_gradient_check():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(16, 6))
    y = rng.integers(0, 3, size=16)
    m = LinearModel(rng.normal(size=(3, 6)), rng.normal(size=3), ("a", "b", "c"))
    assert grad_check(m, X, y, epsilon=1e-5) < 1e-4
    assert grad_check(LinearModel.zeros(("a", "b", "c"), 6), X, y) < 1e-4


def test_gradient_check_catches_corruption():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(8, 4))
    y = rng.integers(0, 2, size=8)
    m = LinearModel(rng.normal(size=(2, 4)), np.zeros(2), ("a", "b"))

    def broken(model):
        _, gw, gb = loss_and_grad(model, X, y)
        gw = gw.copy()
        gw[0, 0] += 1.0
        return gw, gb

    assert grad_check(m, X, y, gradient=broken) > 1e-4


def test_model_json_round_trip():
    X, y, _ = featurized(direction_dataset(10))
    m, _ = train(X, y, epochs=2)
    again = LinearModel.from_json(m.to_json())
    assert np.array_equal(again.weights, m.weights) and again.classes == m.classes


def test_accuracy_tsv():
    out = accuracy_tsv(["dsp", "dsp", "drp"], ["child", "parent", "ATT"], ["child", "child", "ATT"])
    assert out.splitlines() == ["task\tlabel\tn\tcorrect\taccuracy", "drp\tATT\t1\t1\t1.0000",
                                "dsp\tchild\t1\t1\t1.0000", "dsp\tparent\t1\t0\t0.0000"]
