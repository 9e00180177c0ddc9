"""Multinomial logistic-regression probe over hand-built pair features.

A small, fully checkable learner used to confirm that sampled pair examples
carry learnable signal. It is not a stand-in for an encoder-based classifier.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from csedkit.deptree import DepTree, tree_distance
from csedkit.sampler import PairExample, resolve_pair


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, loss: float):
        super().__init__(f"loss became non-finite ({loss}) at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class PairVocab:
    """UPOS-pair buckets; anything outside the vocabulary shares one extra bucket."""
    pairs: tuple[str, ...]

    @classmethod
    def build(cls, upos_pairs: Sequence[str], cap: int = 64) -> "PairVocab":
        counts: dict[str, int] = {}
        for p in upos_pairs:
            counts[p] = counts.get(p, 0) + 1
        ranked = sorted(counts, key=lambda p: (-counts[p], p))
        return cls(tuple(ranked[:cap]))

    def __len__(self) -> int:
        return len(self.pairs) + 1

    def bucket(self, pair: str) -> int:
        try:
            return self.pairs.index(pair)
        except ValueError:
            return len(self.pairs)


FEATURE_NAMES = ("offset", "distance", "direction", "len_i", "len_j")


def upos_pair(t: DepTree, i: int, j: int) -> str:
    return f"{t[i].upos}|{t[j].upos}"


def featurize(ex: PairExample, t: DepTree, vocab: PairVocab) -> np.ndarray:
    """Feature layout: offset j-i, tree distance, head(i)==j, word lengths, then UPOS-pair one-hot.

    The dependency label never enters the vector.
    """
    i, j = resolve_pair(t, ex)
    dense = [j - i, tree_distance(t, i, j), float(t[i].head == j), len(t[i].form), len(t[j].form)]
    onehot = np.zeros(len(vocab))
    onehot[vocab.bucket(upos_pair(t, i, j))] = 1.0
    return np.concatenate([np.asarray(dense, dtype=float), onehot])


@dataclass
class LinearModel:
    weights: np.ndarray  # (classes, features)
    bias: np.ndarray     # (classes,)
    classes: tuple[str, ...]

    @classmethod
    def zeros(cls, classes: Sequence[str], dim: int) -> "LinearModel":
        return cls(np.zeros((len(classes), dim)), np.zeros(len(classes)), tuple(classes))

    def to_json(self) -> str:
        k, d = self.weights.shape
        return json.dumps({"classes": list(self.classes), "n_classes": k, "n_features": d,
                           "weights": self.weights.ravel().tolist(), "bias": self.bias.tolist()},
                          ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "LinearModel":
        d = json.loads(text)
        w = np.asarray(d["weights"], dtype=float).reshape(d["n_classes"], d["n_features"])
        return cls(w, np.asarray(d["bias"], dtype=float), tuple(d["classes"]))


def softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def loss_and_grad(m: LinearModel, X: np.ndarray, y: np.ndarray, l2: float = 1e-4):
    """Mean cross-entropy plus ``l2/2 * ||W||^2`` (bias unpenalised), with its gradient."""
    probs = softmax(X @ m.weights.T + m.bias)
    n = X.shape[0]
    loss = -np.log(probs[np.arange(n), y] + 1e-300).mean() + 0.5 * l2 * np.sum(m.weights ** 2)
    delta = probs.copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n
    return loss, delta.T @ X + l2 * m.weights, delta.sum(axis=0)


def train(X: np.ndarray, labels: Sequence[str], lr: float = 0.1, epochs: int = 50, batch: int = 32,
          seed: int = 0, l2: float = 1e-4, classes: Optional[Sequence[str]] = None):
    """Mini-batch gradient descent from zero weights; ``seed`` only drives shuffling.

    Returns ``(model, history)`` where ``history[k]`` is the full-data loss after
    ``k`` epochs (``history[0]`` is the initial loss).
    """
    X = np.asarray(X, dtype=float)
    classes = tuple(classes) if classes is not None else tuple(sorted(set(labels)))
    if len(set(labels)) < 2:
        raise ValueError("training needs at least two classes")
    index = {c: k for k, c in enumerate(classes)}
    y = np.array([index[l] for l in labels])
    m = LinearModel.zeros(classes, X.shape[1])
    rng = np.random.default_rng(seed)
    history = [loss_and_grad(m, X, y, l2)[0]]
    for epoch in range(1, epochs + 1):
        order = rng.permutation(len(y))
        for start in range(0, len(y), batch):
            idx = order[start:start + batch]
            _, gw, gb = loss_and_grad(m, X[idx], y[idx], l2)
            m.weights -= lr * gw
            m.bias -= lr * gb
        loss = loss_and_grad(m, X, y, l2)[0]
        if not np.isfinite(loss) or not np.all(np.isfinite(m.weights)):
            raise TrainingDiverged(epoch, loss)
        history.append(loss)
    return m, history


def predict(m: LinearModel, fv: np.ndarray):
    fv = np.asarray(fv, dtype=float)
    if fv.shape[-1] != m.weights.shape[1]:
        raise ValueError(f"feature dimension {fv.shape[-1]} does not match model ({m.weights.shape[1]})")
    probs = softmax(fv @ m.weights.T + m.bias)
    return m.classes[int(np.argmax(probs))], probs


def grad_check(m: LinearModel, X: np.ndarray, y: np.ndarray, epsilon: float = 1e-5, l2: float = 1e-4,
               gradient: Optional[Callable] = None) -> float:
    """Largest relative gap between analytic and central-difference gradients over all parameters."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    gradient = gradient or (lambda model: loss_and_grad(model, X, y, l2)[1:])
    gw, gb = gradient(m)
    worst = 0.0
    for param, analytic in ((m.weights, gw), (m.bias, gb)):
        for idx in np.ndindex(param.shape):
            saved = param[idx]
            param[idx] = saved + epsilon
            up = loss_and_grad(m, X, y, l2)[0]
            param[idx] = saved - epsilon
            down = loss_and_grad(m, X, y, l2)[0]
            param[idx] = saved
            numeric = (up - down) / (2 * epsilon)
            scale = max(abs(numeric), abs(analytic[idx]), 1e-6)
            worst = max(worst, abs(numeric - analytic[idx]) / scale)
    return worst


def accuracy_tsv(tasks: Sequence[str], golds: Sequence[str], preds: Sequence[str]) -> str:
    """Per task/label accuracy table: task, label, n, correct, accuracy."""
    cells: dict[tuple[str, str], list[int]] = {}
    for t, g, p in zip(tasks, golds, preds):
        c = cells.setdefault((t, g), [0, 0])
        c[0] += 1
        c[1] += g == p
    lines = ["task\tlabel\tn\tcorrect\taccuracy"]
    for (t, g), (n, k) in sorted(cells.items()):
        lines.append(f"{t}\t{g}\t{n}\t{k}\t{k / n:.4f}")
    return "\n".join(lines) + "\n"
