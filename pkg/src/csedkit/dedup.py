"""Levenshtein-ratio similarity and train/eval leakage filtering."""
from __future__ import annotations

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence


@dataclass(frozen=True)
class DedupConfig:
    gamma: float = 0.70
    unit: str = "char"  # "char" or "word" (whitespace-split)

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.unit not in ("char", "word"):
            raise ValueError(f"unit must be 'char' or 'word', got {self.unit!r}")


@dataclass(frozen=True)
class SimilarityHit:
    """Removed train sentence and the eval sentence it most resembles (0-based indices)."""
    train_line: int
    eval_line: int
    eval_split: str
    ratio: float


def _distance(a: Sequence, b: Sequence, sub_cost: int) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (0 if ca == cb else sub_cost)))
        prev = cur
    return prev[-1]


def levenshtein(a: Sequence, b: Sequence) -> int:
    """Unit-cost edit distance over characters (or any sequence of hashables)."""
    return _distance(a, b, 1)


def indel_distance(a: Sequence, b: Sequence) -> int:
    """Edit distance where a substitution costs 2 (an insertion plus a deletion)."""
    return _distance(a, b, 2)


def lev_ratio(a: Sequence, b: Sequence) -> float:
    total = len(a) + len(b)
    if total == 0:
        return 1.0
    return (total - indel_distance(a, b)) / total


def ratio_upper_bound(a: Sequence, b: Sequence) -> float:
    """Cheap upper bound on :func:`lev_ratio` from shared symbol counts.

    At most ``|common multiset|`` symbols can be aligned as matches, so
    ``dist2 >= |a| + |b| - 2 * common``. The length bound ``2*min/(|a|+|b|)``
    is implied by this one.
    """
    total = len(a) + len(b)
    if total == 0:
        return 1.0
    common = sum((Counter(a) & Counter(b)).values())
    return 2 * common / total


def _units(s: str, unit: str):
    return s.split() if unit == "word" else s


def _scan(args):
    offset, train_chunk, eval_items, gamma, unit = args
    hits = []
    for k, sent in enumerate(train_chunk):
        a = _units(sent, unit)
        best = None
        for split, idx, b, blen in eval_items:
            total = len(a) + blen
            # Length gap alone caps the ratio; skip when it cannot beat gamma or the current best.
            if total and 2 * min(len(a), blen) / total <= max(gamma, best.ratio if best else gamma):
                continue
            if ratio_upper_bound(a, b) <= max(gamma, best.ratio if best else gamma):
                continue
            r = lev_ratio(a, b)
            if r > gamma and (best is None or r > best.ratio):
                best = SimilarityHit(offset + k, idx, split, r)
        if best is not None:
            hits.append(best)
    return hits


def filter_leakage(train: Sequence[str], eval_sets: Mapping[str, Sequence[str]],
                   cfg: DedupConfig = DedupConfig(), jobs: int = 1):
    """Drop train sentences whose best ratio against any eval sentence exceeds ``cfg.gamma``.

    Returns ``(kept, removed)``; ``kept`` preserves input order and ``removed``
    holds one maximizing hit per dropped sentence (first eval split/line wins ties).
    """
    if not eval_sets or any(len(v) == 0 for v in eval_sets.values()):
        raise ValueError("every eval set must be non-empty")
    eval_items = []
    for split, sents in eval_sets.items():
        for idx, s in enumerate(sents):
            b = _units(s, cfg.unit)
            eval_items.append((split, idx, b, len(b)))

    if jobs > 1 and len(train) > 1:
        size = -(-len(train) // jobs)
        chunks = [(o, train[o:o + size], eval_items, cfg.gamma, cfg.unit) for o in range(0, len(train), size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            removed = [h for part in pool.map(_scan, chunks) for h in part]
    else:
        removed = _scan((0, list(train), eval_items, cfg.gamma, cfg.unit))

    gone = {h.train_line for h in removed}
    kept = [s for i, s in enumerate(train) if i not in gone]
    return kept, removed


def write_hits_tsv(hits: Sequence[SimilarityHit], stream) -> None:
    """TSV report with 1-based line numbers."""
    stream.write("train_line\teval_split\teval_line\tratio\n")
    for h in hits:
        stream.write(f"{h.train_line + 1}\t{h.eval_split}\t{h.eval_line + 1}\t{h.ratio:.6f}\n")
