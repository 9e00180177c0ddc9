"""Train the logistic-regression probe on sampled pair examples.

    python scripts/run_probe.py parsed.conllu --task dsp --out probe/

Writes model.json and accuracy.tsv into the output directory and prints the
final loss, training accuracy and a gradient check on the trained model.
"""
import argparse
import logging
from pathlib import Path

import numpy as np

from csedkit.baseline import PairVocab, accuracy_tsv, featurize, grad_check, predict, train, upos_pair
from csedkit.deptree import parse_conllu
from csedkit.sampler import SAMPLERS, SamplerConfig, resolve_pair

log = logging.getLogger("run_probe")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("conllu")
    p.add_argument("--task", choices=("dsp", "dsp+", "drp"), default="dsp")
    p.add_argument("--out", default="probe")
    p.add_argument("--pairs-per-sentence", type=int, default=4)
    p.add_argument("--flip", action="store_true", help="head(i)=j means parent instead of child")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=64, help="UPOS-pair vocabulary size")
    a = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    trees = parse_conllu(Path(a.conllu).read_text("utf-8"))
    cfg = SamplerConfig(pairs_per_sentence=a.pairs_per_sentence, seed=a.seed, flip=a.flip)
    rows = [(ex, t) for k, t in enumerate(trees) for ex in SAMPLERS[a.task](t, cfg, t.sent_id or str(k))]
    if not rows:
        raise SystemExit("no examples sampled")
    vocab = PairVocab.build([upos_pair(t, *resolve_pair(t, ex)) for ex, t in rows], cap=a.cap)
    X = np.stack([featurize(ex, t, vocab) for ex, t in rows])
    labels = [ex.label for ex, _ in rows]
    log.info("%d examples, %d features, seed=%d", len(labels), X.shape[1], a.seed)

    model, history = train(X, labels, lr=a.lr, epochs=a.epochs, batch=a.batch, seed=a.seed)
    preds = [predict(model, x)[0] for x in X]
    acc = np.mean([p == g for p, g in zip(preds, labels)])
    y = np.array([model.classes.index(l) for l in labels])
    err = grad_check(model, X[:64], y[:64])
    log.info("loss %.4f -> %.4f, train accuracy %.2f%%, grad check %.2e", history[0], history[-1], 100 * acc, err)

    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "model.json").write_text(model.to_json() + "\n", encoding="utf-8")
    (out / "accuracy.tsv").write_text(accuracy_tsv([ex.task for ex, _ in rows], labels, preds), encoding="utf-8")


if __name__ == "__main__":
    main()
