"""Corpus statistics: line counts, average lengths, error ratio and average edits per pair."""
from __future__ import annotations

from typing import Sequence

from csedkit.edits import extract_edits

LABELED_COLUMNS = ("#Line", "Avg.Length", "Error Ratio")
PAIR_COLUMNS = ("#Line", "Avg.Length.S", "Avg.Length.T", "Avg.Edit")


def char_length(s: str) -> int:
    """Sentence length in characters, whitespace excluded (tokenized text counts the same as raw)."""
    return sum(not c.isspace() for c in s)


def _units(s: str, unit: str) -> list[str]:
    return s.split() if unit == "token" else [c for c in s if not c.isspace()]


def labeled_stats(rows: Sequence[tuple[str, str]]) -> dict:
    """``rows`` are (sentence, label) with label ``correct`` or ``incorrect``."""
    if not rows:
        raise ValueError("no sentences")
    bad = [lab for _, lab in rows if lab not in ("correct", "incorrect")]
    if bad:
        raise ValueError(f"unknown label {bad[0]!r}")
    n = len(rows)
    return {"#Line": n,
            "Avg.Length": sum(char_length(s) for s, _ in rows) / n,
            "Error Ratio": sum(lab == "incorrect" for _, lab in rows) / n}


def pair_stats(rows: Sequence[tuple[str, Sequence[str]]], unit: str = "token", detail: bool = False) -> dict:
    """``rows`` are (source, targets); every source/target pair counts towards the target columns."""
    if not rows:
        raise ValueError("no sentence pairs")
    pairs = [(s, t) for s, targets in rows for t in targets]
    if not pairs:
        raise ValueError("no targets")
    out = {"#Line": len(rows),
           "Avg.Length.S": sum(char_length(s) for s, _ in rows) / len(rows),
           "Avg.Length.T": sum(char_length(t) for _, t in pairs) / len(pairs)}
    units = ("token", "char") if detail else (unit,)
    for u in units:
        name = "Avg.Edit" if u == unit else f"Avg.Edit({u})"
        out[name] = sum(len(extract_edits(_units(s, u), _units(t, u))) for s, t in pairs) / len(pairs)
    if detail:
        out[f"Avg.Edit({unit})"] = out["Avg.Edit"]
    return out


def format_value(column: str, value) -> str:
    if column == "#Line":
        return f"{value:,}"
    if column == "Error Ratio":
        return f"{100 * value:.1f}%"
    return f"{value:.1f}"


def format_table(stats: dict) -> str:
    cols = list(stats)
    return "\t".join(cols) + "\n" + "\t".join(format_value(c, stats[c]) for c in cols) + "\n"
