"""Dependency trees: CoNLL-U ingestion, validation and structural queries.

Token indices are 1-based throughout; head 0 denotes the artificial root.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Optional

log = logging.getLogger(__name__)

VERB_UPOS = frozenset({"VERB", "AUX", "v"})
NOUN_UPOS = frozenset({"NOUN", "PROPN", "PRON", "NUM", "n", "nh", "ni", "nl", "ns", "nt", "nz", "r"})


class ConllError(ValueError):
    """Malformed CoNLL-U input; ``line`` is the 1-based input line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class Relationship(str, Enum):
    CHILD = "child"
    PARENT = "parent"
    OTHERS = "others"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Token:
    index: int
    form: str
    upos: str
    xpos: str
    head: int
    deprel: str
    misc: str = "_"
    char_span: tuple[int, int] = (0, 0)
    lemma: str = "_"
    feats: str = "_"
    deps: str = "_"

    def misc_dict(self) -> dict[str, str]:
        if self.misc in ("", "_"):
            return {}
        out = {}
        for item in self.misc.split("|"):
            key, _, value = item.partition("=")
            out[key] = value
        return out


@dataclass(frozen=True)
class DepTree:
    text: str
    tokens: tuple[Token, ...]
    comments: tuple[str, ...] = field(default=(), compare=True)

    def __post_init__(self):
        _validate_structure(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __getitem__(self, i: int) -> Token:
        self._check(i)
        return self.tokens[i - 1]

    def _check(self, i: int) -> None:
        if not isinstance(i, int) or not 1 <= i <= len(self.tokens):
            raise IndexError(f"token index {i} out of range 1..{len(self.tokens)}")

    @property
    def sent_id(self) -> Optional[str]:
        for c in self.comments:
            key, _, value = c.lstrip("#").partition("=")
            if key.strip() == "sent_id":
                return value.strip()
        return None

    @property
    def root(self) -> int:
        return next(t.index for t in self.tokens if t.head == 0)

    def head(self, i: int) -> int:
        return self[i].head

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        """``children[i]`` lists dependents of ``i`` in token order; slot 0 is the root's parent."""
        kids: list[list[int]] = [[] for _ in range(len(self.tokens) + 1)]
        for t in self.tokens:
            kids[t.head].append(t.index)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def depth(self) -> tuple[int, ...]:
        d = [0] * (len(self.tokens) + 1)
        order = deque([0])
        while order:
            node = order.popleft()
            for c in self.children[node]:
                d[c] = d[node] + 1
                order.append(c)
        return tuple(d)

    def word(self, i: int) -> str:
        s, e = self[i].char_span
        return self.text[s:e]


def _validate_structure(tokens: tuple[Token, ...], line: int = 0) -> None:
    n = len(tokens)
    if n == 0:
        raise ConllError("empty sentence", line)
    for pos, t in enumerate(tokens, start=1):
        if t.index != pos:
            raise ConllError(f"token ids must run 1..n, got {t.index} at position {pos}", line)
        if not 0 <= t.head <= n:
            raise ConllError(f"head {t.head} of token {pos} out of range 0..{n}", line)
    roots = [t.index for t in tokens if t.head == 0]
    if len(roots) != 1:
        raise ConllError(f"expected exactly one root, found {len(roots)}", line)
    for t in tokens:
        node, steps = t.index, 0
        while node != 0:
            node = tokens[node - 1].head
            steps += 1
            if steps > n:
                raise ConllError(f"cycle through token {t.index}", line)
    prev_end = 0
    for t in tokens:
        s, e = t.char_span
        if s < prev_end or e < s:
            raise ConllError(f"character span {t.char_span} of token {t.index} overlaps or is reversed", line)
        prev_end = e


def _locate_spans(text: str, forms: list[str], line: int) -> list[tuple[int, int]]:
    spans = []
    cursor = 0
    for form in forms:
        start = text.find(form, cursor)
        # Only whitespace may separate consecutive tokens.
        if start < 0 or text[cursor:start].strip():
            raise ConllError(f"token {form!r} not found in sentence text after offset {cursor}", line)
        spans.append((start, start + len(form)))
        cursor = start + len(form)
    if text[cursor:].strip():
        raise ConllError("sentence text has material after the last token", line)
    return spans


def _build_tree(rows: list[tuple[int, list[str]]], comments: list[str], first_line: int) -> DepTree:
    forms = [cols[1] for _, cols in rows]
    text = None
    for c in comments:
        key, sep, value = c.lstrip("#").partition("=")
        if sep and key.strip() == "text":
            text = value.strip()
    if text is None:
        text = "".join(forms)
    spans = _locate_spans(text, forms, first_line)
    tokens = []
    n = len(rows)
    for pos, ((lineno, cols), span) in enumerate(zip(rows, spans), start=1):
        if not cols[0].isdigit():
            raise ConllError(f"unsupported token id {cols[0]!r} (multiword/empty nodes are not accepted)", lineno)
        if int(cols[0]) != pos:
            raise ConllError(f"token id {cols[0]} out of sequence, expected {pos}", lineno)
        try:
            head = int(cols[6])
        except ValueError:
            raise ConllError(f"non-integer head {cols[6]!r}", lineno) from None
        if not 0 <= head <= n:
            raise ConllError(f"head {head} out of range 0..{n}", lineno)
        tokens.append(Token(index=pos, form=cols[1], lemma=cols[2], upos=cols[3], xpos=cols[4],
                            feats=cols[5], head=head, deprel=cols[7], deps=cols[8], misc=cols[9],
                            char_span=span))
    _validate_structure(tuple(tokens), first_line)
    return DepTree(text=text, tokens=tuple(tokens), comments=tuple(comments))


def parse_conllu(stream: str | Iterable[str], lenient: bool = False) -> list[DepTree]:
    """Parse CoNLL-U text into trees.

    Each record is validated on its own. With ``lenient`` a malformed record is
    logged and skipped; otherwise the first problem raises :class:`ConllError`.
    """
    lines = stream.splitlines() if isinstance(stream, str) else [l.rstrip("\n") for l in stream]
    trees: list[DepTree] = []
    comments: list[str] = []
    rows: list[tuple[int, list[str]]] = []
    start = 1
    bad: Optional[ConllError] = None

    def flush():
        nonlocal comments, rows, bad
        if rows or comments or bad:
            try:
                if bad is not None:
                    raise bad
                if not rows:
                    raise ConllError("record has comments but no tokens", start)
                trees.append(_build_tree(rows, comments, start))
            except ConllError as exc:
                if not lenient:
                    raise
                log.warning("skipping record: %s", exc)
        comments, rows, bad = [], [], None

    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            flush()
            start = lineno + 1
            continue
        if bad is not None:
            continue
        if line.startswith("#"):
            if rows:
                bad = ConllError("comment line inside token block", lineno)
            else:
                comments.append(line)
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            bad = ConllError(f"expected 10 tab-separated columns, got {len(cols)}", lineno)
            continue
        rows.append((lineno, cols))
    flush()
    return trees


def serialize_conllu(trees: Iterable[DepTree]) -> str:
    out = []
    for t in trees:
        out.extend(t.comments)
        for tok in t.tokens:
            out.append("\t".join([str(tok.index), tok.form, tok.lemma, tok.upos, tok.xpos, tok.feats,
                                  str(tok.head), tok.deprel, tok.deps, tok.misc]))
        out.append("")
    return "\n".join(out) + "\n" if out else ""


def make_tree(forms, heads, deprels, upos=None, xpos=None, misc=None, sep: str = "",
              comments=()) -> DepTree:
    """Build a tree directly from parallel lists; handy for fixtures and scripts."""
    n = len(forms)
    upos = upos or ["_"] * n
    xpos = xpos or ["_"] * n
    misc = misc or ["_"] * n
    text = sep.join(forms)
    spans, cursor = [], 0
    for f in forms:
        spans.append((cursor, cursor + len(f)))
        cursor += len(f) + len(sep)
    tokens = tuple(Token(index=i + 1, form=forms[i], upos=upos[i], xpos=xpos[i], head=heads[i],
                         deprel=deprels[i], misc=misc[i], char_span=spans[i]) for i in range(n))
    comments = tuple(comments)
    for c in comments:
        if not c.startswith("#"):
            raise ValueError(f"comment lines must start with '#': {c!r}")
    if sep and not any(c.startswith("# text") for c in comments):
        comments = comments + (f"# text = {text}",)
    return DepTree(text=text, tokens=tokens, comments=comments)


def tree_distance(t: DepTree, i: int, j: int) -> int:
    """Number of edges on the undirected path between tokens ``i`` and ``j``."""
    t._check(i)
    t._check(j)
    depth = t.depth
    a, b = i, j
    while depth[a] > depth[b]:
        a = t.tokens[a - 1].head
    while depth[b] > depth[a]:
        b = t.tokens[b - 1].head
    while a != b:
        a = t.tokens[a - 1].head
        b = t.tokens[b - 1].head
    return depth[i] + depth[j] - 2 * depth[a]


def distance_matrix(t: DepTree) -> list[list[int]]:
    """All-pairs tree distances, indexed ``[i][j]`` with 1-based token indices (row/col 0 unused)."""
    n = len(t)
    adj: list[list[int]] = [[] for _ in range(n + 1)]
    for tok in t.tokens:
        if tok.head:
            adj[tok.index].append(tok.head)
            adj[tok.head].append(tok.index)
    dist = [[0] * (n + 1) for _ in range(n + 1)]
    for src in range(1, n + 1):
        row = dist[src]
        seen = [False] * (n + 1)
        seen[src] = True
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    row[v] = row[u] + 1
                    queue.append(v)
    return dist


def relationship(t: DepTree, i: int, j: int, flip: bool = False) -> Relationship:
    """Structural relation of ``i`` to ``j``: child when ``head(i) == j`` (inverted by ``flip``)."""
    t._check(i)
    t._check(j)
    if i == j:
        raise ValueError("relationship is undefined for i == j")
    if t.tokens[i - 1].head == j:
        rel = Relationship.CHILD
    elif t.tokens[j - 1].head == i:
        rel = Relationship.PARENT
    else:
        return Relationship.OTHERS
    if flip:
        rel = Relationship.PARENT if rel is Relationship.CHILD else Relationship.CHILD
    return rel


def relation_label(t: DepTree, i: int, j: int) -> Optional[str]:
    t._check(i)
    t._check(j)
    if i != j and t.tokens[i - 1].head == j:
        return t.tokens[i - 1].deprel
    if i != j and t.tokens[j - 1].head == i:
        return t.tokens[j - 1].deprel
    return None


@dataclass(frozen=True)
class SubtreeSpan:
    indices: frozenset[int]
    char_span: tuple[int, int]
    contiguous: bool


def subtree_span(t: DepTree, i: int) -> SubtreeSpan:
    t._check(i)
    members = []
    stack = [i]
    while stack:
        node = stack.pop()
        members.append(node)
        stack.extend(t.children[node])
    lo, hi = min(members), max(members)
    return SubtreeSpan(indices=frozenset(members),
                       char_span=(t.tokens[lo - 1].char_span[0], t.tokens[hi - 1].char_span[1]),
                       contiguous=hi - lo + 1 == len(members))


def _first_dependent(t: DepTree, head: int, label: str) -> Optional[int]:
    return next((c for c in t.children[head] if t.tokens[c - 1].deprel == label), None)


def find_spo(t: DepTree) -> dict[str, int]:
    """Subject/predicate/object indices; absent roles are omitted, ties go to the leftmost."""
    pred = t.root
    out = {"predicate": pred}
    subj = _first_dependent(t, pred, "SBV")
    obj = _first_dependent(t, pred, "VOB")
    if subj is not None:
        out["subject"] = subj
    if obj is not None:
        out["object"] = obj
    return out


def is_verb(tok: Token) -> bool:
    return tok.upos in VERB_UPOS or tok.xpos == "v"


def is_noun(tok: Token) -> bool:
    return tok.upos in NOUN_UPOS or tok.xpos.startswith("n")


def find_modifiers(t: DepTree) -> list[tuple[str, int]]:
    out = []
    for tok in t.tokens:
        if tok.head == 0:
            continue
        head = t.tokens[tok.head - 1]
        if tok.deprel == "ADV" and is_verb(head):
            out.append(("adverbial", tok.index))
        elif tok.deprel == "ATT" and is_noun(head):
            out.append(("attribute", tok.index))
    return out
