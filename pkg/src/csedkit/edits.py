"""Token-level edit extraction, application and the M2 interchange format."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, TextIO

NOOP_TYPE = "noop"
DEFAULT_TYPE = "UNK"


class M2FormatError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Edit:
    start: int
    end: int
    replacement: tuple[str, ...] = ()
    type_tag: Optional[str] = None

    def __post_init__(self):
        if not 0 <= self.start <= self.end:
            raise ValueError(f"bad edit offsets {self.start}..{self.end}")
        object.__setattr__(self, "replacement", tuple(self.replacement))

    @property
    def key(self) -> tuple[int, int, tuple[str, ...]]:
        """Identity used for matching edits against each other (type ignored)."""
        return self.start, self.end, self.replacement


def _overlaps(a: Edit, b: Edit) -> bool:
    """``a`` sorts before ``b``; they clash if ``a`` reaches past ``b``'s start or both insert at one point."""
    if a.end > b.start:
        return True
    return a.start == a.end == b.start == b.end


@dataclass(frozen=True)
class EditSet:
    edits: tuple[Edit, ...] = ()
    annotator: int = 0

    def __post_init__(self):
        edits = tuple(sorted(self.edits, key=lambda e: (e.start, e.end)))
        for a, b in zip(edits, edits[1:]):
            if _overlaps(a, b):
                raise ValueError(f"overlapping edits {a} and {b}")
        object.__setattr__(self, "edits", edits)

    def __len__(self) -> int:
        return len(self.edits)

    def __iter__(self):
        return iter(self.edits)


@dataclass(frozen=True)
class M2Record:
    source_tokens: tuple[str, ...]
    references: tuple[EditSet, ...] = field(default_factory=lambda: (EditSet(),))

    def __post_init__(self):
        object.__setattr__(self, "source_tokens", tuple(self.source_tokens))
        object.__setattr__(self, "references", tuple(self.references))
        if not self.references:
            raise ValueError("an M2 record needs at least one reference")
        n = len(self.source_tokens)
        for ref in self.references:
            for e in ref:
                if e.end > n:
                    raise ValueError(f"edit {e} exceeds source length {n}")


def extract_edits(src: Sequence[str], tgt: Sequence[str], annotator: int = 0) -> EditSet:
    """Minimal Levenshtein alignment, then maximal runs of non-match operations become edits.

    Among minimum-cost alignments the one with the fewest edit runs is chosen,
    which keeps the edit count stable when both sides share a prefix or suffix.
    """
    n, m = len(src), len(tgt)
    INF = (n + m + 1, n + m + 1)
    # best[i][j][s]: (cost, runs) of aligning src[:i] with tgt[:j]; s = 1 if the last op was an edit.
    best = [[[INF, INF] for _ in range(m + 1)] for _ in range(n + 1)]
    back = [[[None, None] for _ in range(m + 1)] for _ in range(n + 1)]
    best[0][0][0] = (0, 0)
    for i in range(n + 1):
        for j in range(m + 1):
            for s in (0, 1):
                cur = best[i][j][s]
                if cur == INF:
                    continue
                cost, runs = cur
                moves = []
                if i < n and j < m and src[i] == tgt[j]:
                    moves.append((i + 1, j + 1, 0, (cost, runs)))
                step = (cost + 1, runs + (1 - s))
                if i < n and j < m and src[i] != tgt[j]:
                    moves.append((i + 1, j + 1, 1, step))
                if i < n:
                    moves.append((i + 1, j, 1, step))
                if j < m:
                    moves.append((i, j + 1, 1, step))
                for ni, nj, ns, val in moves:
                    if val < best[ni][nj][ns]:
                        best[ni][nj][ns] = val
                        back[ni][nj][ns] = (i, j, s)
    state = min((0, 1), key=lambda s: best[n][m][s])
    path = []
    i, j, s = n, m, state
    while (i, j) != (0, 0):
        pi, pj, ps = back[i][j][s]
        path.append((pi, pj, i, j, s))
        i, j, s = pi, pj, ps
    path.reverse()

    edits = []
    run = None
    for pi, pj, i, j, s in path:
        if s == 1:
            run = [pi, pj, i, j] if run is None else [run[0], run[1], i, j]
        elif run is not None:
            edits.append(Edit(run[0], run[2], tuple(tgt[run[1]:run[3]])))
            run = None
    if run is not None:
        edits.append(Edit(run[0], run[2], tuple(tgt[run[1]:run[3]])))
    return EditSet(tuple(edits), annotator)


def apply_edits(src: Sequence[str], edits: EditSet | Iterable[Edit]) -> list[str]:
    items = sorted(edits, key=lambda e: (e.start, e.end))
    for a, b in zip(items, items[1:]):
        if _overlaps(a, b):
            raise ValueError(f"overlapping edits {a} and {b}")
    out = list(src)
    for e in reversed(items):
        if e.end > len(src):
            raise ValueError(f"edit {e} out of bounds for {len(src)} tokens")
        out[e.start:e.end] = list(e.replacement)
    return out


def avg_edit_stat(pairs: Sequence[tuple[Sequence[str], Sequence[str]]]) -> float:
    if not pairs:
        raise ValueError("avg_edit_stat needs at least one pair")
    return sum(len(extract_edits(s, t)) for s, t in pairs) / len(pairs)


def _a_line(e: Optional[Edit], annotator: int) -> str:
    if e is None:
        return f"A -1 -1|||{NOOP_TYPE}|||-NONE-|||REQUIRED|||-NONE-|||{annotator}"
    tag = e.type_tag if e.type_tag is not None else DEFAULT_TYPE
    return f"A {e.start} {e.end}|||{tag}|||{' '.join(e.replacement)}|||REQUIRED|||-NONE-|||{annotator}"


def write_m2(records: Iterable[M2Record], stream: TextIO) -> None:
    for rec in records:
        stream.write("S " + " ".join(rec.source_tokens) + "\n")
        for ref in rec.references:
            if not ref.edits:
                stream.write(_a_line(None, ref.annotator) + "\n")
            for e in ref:
                stream.write(_a_line(e, ref.annotator) + "\n")
        stream.write("\n")


def _parse_a_line(line: str, lineno: int, n: int) -> tuple[Optional[Edit], int]:
    fields = line[2:].split("|||")
    if len(fields) != 6:
        raise M2FormatError(f"expected 6 '|||' fields in A line, got {len(fields)}", lineno)
    try:
        start, end = (int(x) for x in fields[0].split())
        annotator = int(fields[5])
    except ValueError:
        raise M2FormatError("non-integer offsets or annotator id", lineno) from None
    if fields[1] == NOOP_TYPE or (start, end) == (-1, -1):
        return None, annotator
    if not 0 <= start <= end <= n:
        raise M2FormatError(f"offsets {start} {end} out of range for {n} source tokens", lineno)
    return Edit(start, end, tuple(fields[2].split()), fields[1]), annotator


def read_m2(stream: TextIO | str) -> list[M2Record]:
    """Read M2 records. An S line with no A lines yields one empty reference (annotator 0)."""
    lines = stream.splitlines() if isinstance(stream, str) else stream.read().splitlines()
    records = []
    src: Optional[list[str]] = None
    groups: dict[int, list[Edit]] = {}
    src_line = 0

    def close():
        nonlocal src, groups
        if src is None:
            return
        refs = []
        for ann, edits in groups.items():
            try:
                refs.append(EditSet(tuple(edits), ann))
            except ValueError as exc:
                raise M2FormatError(str(exc), src_line) from None
        records.append(M2Record(tuple(src), tuple(refs) or (EditSet(),)))
        src, groups = None, {}

    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            close()
        elif line.startswith("S"):
            if src is not None:
                raise M2FormatError("missing blank line before S line", lineno)
            if line != "S" and not line.startswith("S "):
                raise M2FormatError("malformed S line", lineno)
            src, src_line = line[2:].split(), lineno
        elif line.startswith("A "):
            if src is None:
                raise M2FormatError("A line without a preceding S line", lineno)
            edit, ann = _parse_a_line(line, lineno, len(src))
            bucket = groups.setdefault(ann, [])
            if edit is not None:
                bucket.append(edit)
        else:
            raise M2FormatError(f"unrecognised line {line[:20]!r}", lineno)
    close()
    return records
