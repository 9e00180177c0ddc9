"""Pair-example generation for dependency structure / relation prediction.

Tasks:
  DSP   child vs parent over directly linked word pairs
  DSP+  child / parent / others (others = tree distance > 1)
  DRP   the arc's dependency label, restricted to a configured label set
  DSRP  DSP (or DSP+) together with DRP
"""
from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

from csedkit.deptree import DepTree, Relationship, distance_matrix, relation_label, relationship

DEFAULT_RELATIONS = ("SBV", "VOB", "IOB", "FOB", "DBL", "ATT", "ADV", "CMP", "COO", "POB", "LAD", "RAD")
TASKS = ("DSP", "DSP+", "DRP")


@dataclass(frozen=True)
class PairExample:
    text: str
    span_i: tuple[int, int]
    span_j: tuple[int, int]
    task: str
    label: str
    source_id: str

    def to_json(self) -> str:
        return json.dumps({"text": self.text, "span_i": list(self.span_i), "span_j": list(self.span_j),
                           "task": self.task, "label": self.label, "source_id": self.source_id},
                          ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> "PairExample":
        d = json.loads(line)
        return cls(d["text"], tuple(d["span_i"]), tuple(d["span_j"]), d["task"], d["label"], d["source_id"])


@dataclass(frozen=True)
class SamplerConfig:
    pairs_per_sentence: int = 4
    relation_set: tuple[str, ...] = DEFAULT_RELATIONS
    seed: int = 0
    flip: bool = False
    others_cap: int = 10_000

    def __post_init__(self):
        if self.pairs_per_sentence < 1:
            raise ValueError("pairs_per_sentence must be positive")
        if not self.relation_set:
            raise ValueError("relation_set must not be empty")
        if len(set(self.relation_set)) != len(self.relation_set):
            raise ValueError("relation_set contains duplicates")


def derive_seed(seed: int, *parts: object) -> int:
    """Stable 64-bit seed from a global seed and identifiers (independent of PYTHONHASHSEED)."""
    h = hashlib.sha256(repr((seed,) + parts).encode("utf-8")).digest()
    return int.from_bytes(h[:8], "big")


def _source_id(t: DepTree, source_id: Optional[str]) -> str:
    if source_id is not None:
        return source_id
    return t.sent_id or ""


def _example(t: DepTree, i: int, j: int, task: str, label: str, sid: str) -> PairExample:
    return PairExample(t.text, t.tokens[i - 1].char_span, t.tokens[j - 1].char_span, task, label, sid)


def _reservoir(stream: Iterable, k: int, rng: random.Random) -> list:
    """Uniform k-subset of a stream (Algorithm R), in order of selection slot."""
    out: list = []
    for n, item in enumerate(stream):
        if n < k:
            out.append(item)
        else:
            r = rng.randrange(n + 1)
            if r < k:
                out[r] = item
    return out


def _balanced(pools: list[list], budget: int, rng: random.Random) -> list[list]:
    """Round-robin quotas over classes; each class sampled without replacement, no backfill."""
    k = len(pools)
    quotas = [budget // k + (1 if c < budget % k else 0) for c in range(k)]
    return [rng.sample(pool, min(q, len(pool))) for pool, q in zip(pools, quotas)]


def _arc_pools(t: DepTree, flip: bool):
    child, parent = [], []
    for tok in t.tokens:
        if tok.head:
            child.append((tok.index, tok.head))
            parent.append((tok.head, tok.index))
    if flip:
        child, parent = parent, child
    return child, parent


def _structure(t: DepTree, cfg: SamplerConfig, source_id: Optional[str], plus: bool) -> list[PairExample]:
    sid = _source_id(t, source_id)
    task = "DSP+" if plus else "DSP"
    rng = random.Random(derive_seed(cfg.seed, sid, task))
    child, parent = _arc_pools(t, cfg.flip)
    labels = [Relationship.CHILD, Relationship.PARENT]
    if not plus:
        picks = _balanced([child, parent], cfg.pairs_per_sentence, rng)
    else:
        k = cfg.pairs_per_sentence
        quota_others = k // 3
        picks = _balanced([child, parent], k - quota_others, rng)
        dist = distance_matrix(t)
        n = len(t)
        far = ((i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j and dist[i][j] > 1)
        if n * (n - 1) <= cfg.others_cap:
            far_list = list(far)
            others = rng.sample(far_list, min(quota_others, len(far_list)))
        else:
            others = _reservoir(far, quota_others, rng)
        picks.append(others)
        labels.append(Relationship.OTHERS)
    out = []
    for label, chosen in zip(labels, picks):
        for i, j in sorted(chosen):
            out.append(_example(t, i, j, task, label.value, sid))
    return sorted(out, key=lambda e: (e.span_i, e.span_j))


def sample_dsp(t: DepTree, cfg: SamplerConfig, source_id: Optional[str] = None) -> list[PairExample]:
    return _structure(t, cfg, source_id, plus=False)


def sample_dsp_plus(t: DepTree, cfg: SamplerConfig, source_id: Optional[str] = None) -> list[PairExample]:
    return _structure(t, cfg, source_id, plus=True)


def sample_drp(t: DepTree, cfg: SamplerConfig, source_id: Optional[str] = None) -> list[PairExample]:
    """Relation examples as (head, dependent) pairs, drawn uniformly from arcs whose label is kept."""
    sid = _source_id(t, source_id)
    rng = random.Random(derive_seed(cfg.seed, sid, "DRP"))
    allowed = set(cfg.relation_set)
    arcs = [(tok.head, tok.index) for tok in t.tokens if tok.head and tok.deprel in allowed]
    chosen = sorted(rng.sample(arcs, min(cfg.pairs_per_sentence, len(arcs))))
    return [_example(t, h, d, "DRP", t.tokens[d - 1].deprel, sid) for h, d in chosen]


def sample_dsrp(t: DepTree, cfg: SamplerConfig, plus: bool = False,
                source_id: Optional[str] = None) -> list[PairExample]:
    structure = sample_dsp_plus(t, cfg, source_id) if plus else sample_dsp(t, cfg, source_id)
    return structure + sample_drp(t, cfg, source_id)


SAMPLERS = {
    "dsp": lambda t, cfg, sid=None: sample_dsp(t, cfg, sid),
    "dsp+": lambda t, cfg, sid=None: sample_dsp_plus(t, cfg, sid),
    "drp": lambda t, cfg, sid=None: sample_drp(t, cfg, sid),
    "dsrp": lambda t, cfg, sid=None: sample_dsrp(t, cfg, False, sid),
    "dsrp+": lambda t, cfg, sid=None: sample_dsrp(t, cfg, True, sid),
}


def write_examples(examples: Iterable[PairExample], stream) -> int:
    n = 0
    for ex in examples:
        stream.write(ex.to_json() + "\n")
        n += 1
    return n


def read_examples(stream) -> list[PairExample]:
    return [PairExample.from_json(line) for line in stream if line.strip()]


def resolve_pair(t: DepTree, ex: PairExample) -> tuple[int, int]:
    """Map an example's character spans back to token indices of ``t``."""
    by_span = {tok.char_span: tok.index for tok in t.tokens}
    try:
        return by_span[tuple(ex.span_i)], by_span[tuple(ex.span_j)]
    except KeyError:
        raise ValueError(f"example spans {ex.span_i}/{ex.span_j} do not match whole tokens") from None


def check_label(t: DepTree, ex: PairExample, flip: bool = False) -> bool:
    """Recompute an example's label from the tree; True when it reproduces the stored one."""
    i, j = resolve_pair(t, ex)
    if ex.task == "DRP":
        return relation_label(t, i, j) == ex.label
    return relationship(t, i, j, flip=flip).value == ex.label
