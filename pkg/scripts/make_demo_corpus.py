"""Write a small synthetic parsed corpus for trying the pipeline end to end.

    python scripts/make_demo_corpus.py demo/ --sentences 200

Produces parsed.conllu (LTP-style labels, space-separated text), plus
train.txt / dev.txt plain-text splits with some deliberate near-duplicates.
"""
import argparse
import random
from pathlib import Path

from csedkit.deptree import make_tree, serialize_conllu

PRONS = ["他", "我们", "大家", "她", "同学们"]
NOUNS = ["报告", "计划", "问题", "方案", "经验", "作品", "城市", "会议"]
VERBS = ["讨论", "完成", "提高", "学习", "参观", "解决", "听取", "制定"]
ADVS = ["认真", "很快", "积极", "已经", "努力"]
ATTS = ["重要", "新", "全部", "有关", "优秀"]


def sentence(rng):
    kind = rng.randrange(3)
    if kind == 0:
        forms = [rng.choice(PRONS), rng.choice(ADVS), rng.choice(VERBS), rng.choice(ATTS), rng.choice(NOUNS), "。"]
        heads = [3, 3, 0, 5, 3, 3]
        deprels = ["SBV", "ADV", "HED", "ATT", "VOB", "WP"]
        upos = ["PRON", "ADV", "VERB", "ADJ", "NOUN", "PUNCT"]
    elif kind == 1:
        v1, v2 = rng.sample(VERBS, 2)
        forms = [rng.choice(PRONS), "不仅", v1, rng.choice(NOUNS), "，", "而且", v2, rng.choice(NOUNS), "。"]
        heads = [3, 3, 0, 3, 3, 7, 3, 7, 3]
        deprels = ["SBV", "ADV", "HED", "VOB", "WP", "ADV", "COO", "VOB", "WP"]
        upos = ["PRON", "CCONJ", "VERB", "NOUN", "PUNCT", "CCONJ", "VERB", "NOUN", "PUNCT"]
    else:
        forms = [rng.choice(ATTS), rng.choice(NOUNS), rng.choice(VERBS), rng.choice(NOUNS), "。"]
        heads = [2, 3, 0, 3, 3]
        deprels = ["ATT", "SBV", "HED", "VOB", "WP"]
        upos = ["ADJ", "NOUN", "VERB", "NOUN", "PUNCT"]
    return forms, heads, deprels, upos


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("out")
    p.add_argument("--sentences", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args()
    rng = random.Random(a.seed)
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    trees = []
    for k in range(a.sentences):
        forms, heads, deprels, upos = sentence(rng)
        trees.append(make_tree(forms, heads, deprels, upos=upos, sep=" ", comments=(f"# sent_id = demo-{k}",)))
    (out / "parsed.conllu").write_text(serialize_conllu(trees), encoding="utf-8")
    plain = ["".join(t.text.split()) for t in trees]
    dev = plain[: len(plain) // 5]
    (out / "dev.txt").write_text("".join(s + "\n" for s in dev), encoding="utf-8")
    (out / "train.txt").write_text("".join(s + "\n" for s in plain[len(dev):]), encoding="utf-8")
    print(f"wrote {len(trees)} sentences to {out}")


if __name__ == "__main__":
    main()
