"""Correction scoring (MaxMatch edit lattice, F-beta) and recognition metrics."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from csedkit.edits import M2Record

ERROR_TYPES = ("word order", "missing", "collocation", "redundant", "confusion", "fuzziness", "illogic")
LABELS = ("correct", "incorrect")


def f_beta(p: float, r: float, beta: float = 0.5) -> float:
    if not (0.0 <= p <= 1.0 and 0.0 <= r <= 1.0):
        raise ValueError(f"precision and recall must lie in [0, 1], got {p}, {r}")
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    b2 = beta * beta
    denom = b2 * p + r
    return 0.0 if denom == 0 else (1 + b2) * p * r / denom


def prf(tp: int, fp: int, fn: int, beta: float = 0.5) -> tuple[float, float, float]:
    """Precision/recall/F from counts; an empty denominator counts as a perfect score."""
    p = tp / (tp + fp) if tp + fp else 1.0
    r = tp / (tp + fn) if tp + fn else 1.0
    return p, r, f_beta(p, r, beta)


@dataclass
class ScoreReport:
    tp: int
    fp: int
    fn: int
    beta: float
    precision: float = 0.0
    recall: float = 0.0
    f_beta: float = 0.0
    per_sentence: list = field(default_factory=list)

    def __post_init__(self):
        self.precision, self.recall, self.f_beta = prf(self.tp, self.fp, self.fn, self.beta)

    def summary(self) -> str:
        name = f"F{self.beta:g}"
        return (f"TP={self.tp} FP={self.fp} FN={self.fn}\n"
                f"P/R/{name} = {100 * self.precision:.1f}/{100 * self.recall:.1f}/{100 * self.f_beta:.1f}")

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "beta": self.beta,
                "precision": self.precision, "recall": self.recall, "f_beta": self.f_beta,
                "per_sentence": [dict(zip(("id", "tp", "fp", "fn", "annotator"), row))
                                 for row in self.per_sentence]}


# -- edit lattice ---------------------------------------------------------------

INS, DEL, SUB = 1, 1, 2


def _alignment_costs(src, hyp):
    n, m = len(src), len(hyp)
    fwd = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        for j in range(m + 1):
            if i == 0 or j == 0:
                fwd[i][j] = i * DEL + j * INS
                continue
            diag = fwd[i - 1][j - 1] + (0 if src[i - 1] == hyp[j - 1] else SUB)
            fwd[i][j] = min(diag, fwd[i - 1][j] + DEL, fwd[i][j - 1] + INS)
    bwd = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n, -1, -1):
        for j in range(m, -1, -1):
            if i == n or j == m:
                bwd[i][j] = (n - i) * DEL + (m - j) * INS
                continue
            diag = bwd[i + 1][j + 1] + (0 if src[i] == hyp[j] else SUB)
            bwd[i][j] = min(diag, bwd[i + 1][j] + DEL, bwd[i][j + 1] + INS)
    return fwd, bwd


def _basic_edges(src, hyp):
    """Single-operation edges lying on some minimum-cost alignment: ``{u: [(v, is_match)]}``."""
    n, m = len(src), len(hyp)
    fwd, bwd = _alignment_costs(src, hyp)
    total = fwd[n][m]
    out: dict[tuple[int, int], list] = {}
    for i in range(n + 1):
        for j in range(m + 1):
            if fwd[i][j] + bwd[i][j] != total:
                continue
            steps = []
            if i < n and j < m:
                same = src[i] == hyp[j]
                steps.append(((i + 1, j + 1), 0 if same else SUB, same))
            if i < n:
                steps.append(((i + 1, j), DEL, False))
            if j < m:
                steps.append(((i, j + 1), INS, False))
            out[(i, j)] = [(v, same) for v, cost, same in steps
                           if fwd[i][j] + cost + bwd[v[0]][v[1]] == total]
    return out


@dataclass(frozen=True)
class LatticeEdge:
    u: tuple[int, int]
    v: tuple[int, int]
    key: Optional[tuple]  # (start, end, replacement) for edits, None for unchanged tokens


def edit_lattice(src: Sequence[str], hyp: Sequence[str], max_unchanged: int = 2) -> list[LatticeEdge]:
    """Lattice of candidate hypothesis edits.

    Vertices are alignment cells on minimum-cost paths (substitution costs 2,
    so delete+insert ties with substitute). Edges are single operations plus
    every compound run whose best underlying path crosses at most
    ``max_unchanged`` matched tokens. An edge's edit is fixed by its endpoints.
    """
    basic = _basic_edges(src, hyp)
    edges = []
    for u in basic:
        for v, same in basic[u]:
            if same:
                edges.append(LatticeEdge(u, v, None))
        # Fewest matches crossed on any path u -> w.
        fewest = {u: 0}
        frontier = [u]
        while frontier:
            nxt = []
            for x in sorted(frontier):
                for w, same in basic.get(x, ()):
                    k = fewest[x] + same
                    if k <= max_unchanged and k < fewest.get(w, max_unchanged + 1):
                        fewest[w] = k
                        nxt.append(w)
            frontier = nxt
        for w in fewest:
            if w == u:
                continue
            s_part = tuple(src[u[0]:w[0]])
            h_part = tuple(hyp[u[1]:w[1]])
            if s_part != h_part:
                edges.append(LatticeEdge(u, w, (u[0], w[0], h_part)))
    return edges


def best_edit_path(edges: Sequence[LatticeEdge], end: tuple[int, int], gold: set) -> tuple[int, int]:
    """Path through the lattice maximising gold matches, then minimising proposed edits.

    Returns ``(tp, proposed)``. Gold holds at most one insertion per source
    position, so a flag per vertex stops a repeated insertion being credited twice.
    """
    out: dict[tuple[int, int], list[LatticeEdge]] = {}
    for e in edges:
        out.setdefault(e.u, []).append(e)
    NEG = (-1, 0)
    best: dict[tuple, tuple[int, int]] = {((0, 0), False): (0, 0)}
    for u in sorted({e.u for e in edges} | {e.v for e in edges} | {(0, 0)}):
        for flag in (False, True):
            cur = best.get((u, flag))
            if cur is None:
                continue
            tp, neg_prop = cur
            for e in out.get(u, ()):
                if e.key is None:
                    val, nflag = (tp, neg_prop), False
                else:
                    insertion = e.key[0] == e.key[1]
                    hit = e.key in gold and not (insertion and flag)
                    val = (tp + hit, neg_prop - 1)
                    nflag = (flag or (insertion and hit)) if insertion else False
                if e.v[0] != u[0]:
                    nflag = False
                if val > best.get((e.v, nflag), NEG):
                    best[(e.v, nflag)] = val
    final = max(best.get((end, False), NEG), best.get((end, True), NEG))
    return final[0], -final[1]


def sentence_counts(src, hyp, references, max_unchanged: int = 2) -> list[tuple[int, int, int, int]]:
    """``(annotator, tp, fp, fn)`` for each reference, in reference order."""
    edges = edit_lattice(src, hyp, max_unchanged)
    end = (len(src), len(hyp))
    rows = []
    for ref in references:
        gold = {e.key for e in ref}
        if src == hyp or not edges:
            tp, proposed = 0, 0
        else:
            tp, proposed = best_edit_path(edges, end, gold)
        rows.append((ref.annotator, tp, proposed - tp, len(gold) - tp))
    return rows


def m2_score(sources: Sequence[Sequence[str]], hypotheses: Sequence[Sequence[str]],
             references: Sequence[M2Record], beta: float = 0.5, max_unchanged: int = 2,
             cumulative: bool = True, ids: Optional[Sequence] = None) -> ScoreReport:
    """Corpus MaxMatch score.

    With ``cumulative`` (default) each sentence takes the reference that
    maximises the running corpus F-beta, folding in input order; otherwise the
    reference maximising the sentence's own F-beta. Ties go to the lower
    annotator id.
    """
    if not len(sources) == len(hypotheses) == len(references):
        raise ValueError(f"length mismatch: {len(sources)} sources, {len(hypotheses)} hypotheses, "
                         f"{len(references)} references")
    tp = fp = fn = 0
    per_sentence = []
    for k, (src, hyp, rec) in enumerate(zip(sources, hypotheses, references)):
        src, hyp = tuple(src), tuple(hyp)
        if src != rec.source_tokens:
            raise ValueError(f"sentence {k}: source does not match its M2 record")
        rows = sorted(sentence_counts(src, hyp, rec.references, max_unchanged))
        chosen, best_f = None, -1.0
        for row in rows:
            _, t, p, n = row
            f = prf(tp + t, fp + p, fn + n, beta)[2] if cumulative else prf(t, p, n, beta)[2]
            if f > best_f:
                chosen, best_f = row, f
        ann, t, p, n = chosen
        tp, fp, fn = tp + t, fp + p, fn + n
        per_sentence.append((ids[k] if ids is not None else k, t, p, n, ann))
    return ScoreReport(tp, fp, fn, beta, per_sentence=per_sentence)


# -- recognition ----------------------------------------------------------------

def normalize_type(tag: str) -> str:
    t = tag.strip().lower().replace("_", " ").replace("-", " ")
    if t not in ERROR_TYPES:
        raise ValueError(f"unknown error type {tag!r}; expected one of {', '.join(ERROR_TYPES)}")
    return t


@dataclass
class ClsReport:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    per_type: Optional[dict] = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def summary(self) -> str:
        lines = [f"TP={self.tp} FP={self.fp} FN={self.fn} TN={self.tn}",
                 f"P/R/F1 = {100 * self.precision:.1f}/{100 * self.recall:.1f}/{100 * self.f1:.1f}"]
        for t, r in (self.per_type or {}).items():
            lines.append(f"recall[{t}] = {100 * r:.1f}")
        return "\n".join(lines)


def cls_metrics(preds: Sequence[str], golds: Sequence[str]) -> ClsReport:
    """Metrics for the ``incorrect`` (error-bearing) class; empty denominators give 0."""
    if len(preds) != len(golds):
        raise ValueError(f"length mismatch: {len(preds)} predictions vs {len(golds)} golds")
    for lab in list(preds) + list(golds):
        if lab not in LABELS:
            raise ValueError(f"unknown label {lab!r}")
    pairs = list(zip(preds, golds))
    tp = sum(p == g == "incorrect" for p, g in pairs)
    fp = sum(p == "incorrect" and g == "correct" for p, g in pairs)
    fn = sum(p == "correct" and g == "incorrect" for p, g in pairs)
    tn = len(pairs) - tp - fp - fn
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return ClsReport(tp, fp, fn, tn, p, r, f1)


def per_type_recall(preds: Sequence[str], golds: Sequence[str],
                    types: Sequence[Optional[str]]) -> ClsReport:
    """Overall metrics plus recall per error type; types with no gold errors are left out."""
    report = cls_metrics(preds, golds)
    if len(types) != len(golds):
        raise ValueError("types must align with golds")
    hit: dict[str, int] = {}
    seen: dict[str, int] = {}
    for p, g, t in zip(preds, golds, types):
        if t is None or t == "":
            continue
        t = normalize_type(t)
        if g != "incorrect":
            continue
        seen[t] = seen.get(t, 0) + 1
        hit[t] = hit.get(t, 0) + (p == "incorrect")
    report.per_type = {t: hit[t] / seen[t] for t in ERROR_TYPES if t in seen}
    return report
