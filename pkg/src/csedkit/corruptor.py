"""Rule-based pseudo-error generation from parsed correct sentences.

Three corruptions, each applied to the surface string of a dependency tree:

* ``adv_att``: swap a verb's adverbial with the attribute of that verb's object,
  so the adverbial ends up modifying the object and the attribute the verb.
* ``conjunction``: break subject placement around a clause conjunction (a
  shared subject belongs before it, distinct subjects after it).
* ``drop_spo``: delete the subject, predicate or object, never one that
  contains a named entity.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from importlib import resources
from typing import Optional, Sequence

from csedkit.deptree import DepTree, Token, find_spo, is_verb, subtree_span
from csedkit.sampler import derive_seed

RULES = ("adv_att", "conjunction", "drop_spo")
ENTITY_XPOS = frozenset({"nh", "ni", "ns"})
NER_KEYS = ("NER", "Entity", "ner")

Span = tuple[int, int]


@dataclass(frozen=True)
class CorruptionRecord:
    source: str
    corrupted: str
    rule: str
    affected_spans: tuple[Span, ...]
    seed: int
    dropped_role: Optional[str] = None

    def to_json(self) -> str:
        return json.dumps({"source": self.source, "corrupted": self.corrupted, "rule": self.rule,
                           "spans": [list(s) for s in self.affected_spans],
                           "dropped_role": self.dropped_role, "seed": self.seed}, ensure_ascii=False)


@dataclass(frozen=True)
class ConjunctionLexicon:
    entries: tuple[str, ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("conjunction lexicon is empty")
        if len(set(self.entries)) != len(self.entries):
            raise ValueError("conjunction lexicon has duplicate entries")

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    @classmethod
    def from_text(cls, text: str) -> "ConjunctionLexicon":
        words = [w.strip() for w in text.splitlines()]
        return cls(tuple(w for w in words if w and not w.startswith("#")))

    @classmethod
    def default(cls) -> "ConjunctionLexicon":
        return cls.from_text(resources.files("csedkit").joinpath("conjunctions.txt").read_text("utf-8"))


def swap_blocks(text: str, first: Span, second: Span) -> str:
    """Exchange two disjoint substrings, keeping whatever lies between them in place."""
    if first[0] > second[0]:
        first, second = second, first
    (a, b), (c, d) = first, second
    if b > c:
        raise ValueError("blocks overlap")
    return text[:a] + text[c:d] + text[b:c] + text[a:b] + text[d:]


def map_after_swap(pos: Span, first: Span, second: Span) -> Span:
    """Where the substring at ``pos`` lands after :func:`swap_blocks` (``pos`` inside one region)."""
    if first[0] > second[0]:
        first, second = second, first
    (a, b), (c, d) = first, second
    s, e = pos
    if a <= s and e <= b:
        shift = (d - c) + (c - b)
    elif c <= s and e <= d:
        shift = -(c - a)
    elif b <= s and e <= c:
        shift = (d - c) - (b - a)
    else:
        shift = 0
    return s + shift, e + shift


# Placement predicates. True means the surface order obeys the rule.

def adv_att_ok(adv: Span, verb: Span, att: Span, obj: Span) -> bool:
    return adv[1] <= verb[0] and verb[1] <= att[0] and att[1] <= obj[0]


def conjunction_ok(subject: Span, conj: Span, same_subject: bool) -> bool:
    before = subject[1] <= conj[0]
    return before if same_subject else not before


def _contiguous_span(t: DepTree, i: int) -> Optional[Span]:
    sub = subtree_span(t, i)
    return sub.char_span if sub.contiguous else None


def _verbs(t: DepTree) -> list[Token]:
    return [tok for tok in t.tokens if is_verb(tok)]


def adv_att_candidates(t: DepTree) -> list[dict]:
    """All (adverbial, verb, attribute, object) quadruples whose swap is well-formed."""
    out = []
    for verb in _verbs(t):
        kids = t.children[verb.index]
        advs = [c for c in kids if t.tokens[c - 1].deprel == "ADV"]
        objs = [c for c in kids if t.tokens[c - 1].deprel == "VOB"]
        for adv in advs:
            adv_span = _contiguous_span(t, adv)
            if adv_span is None:
                continue
            for obj in objs:
                for att in t.children[obj]:
                    if t.tokens[att - 1].deprel != "ATT":
                        continue
                    att_span = _contiguous_span(t, att)
                    if att_span is None:
                        continue
                    spans = dict(adv=adv_span, verb=verb.char_span, att=att_span,
                                 obj=t.tokens[obj - 1].char_span)
                    if not adv_att_ok(**spans):
                        continue
                    if t.text[slice(*adv_span)] == t.text[slice(*att_span)]:
                        continue
                    out.append(spans)
    return out


def corrupt_adv_att(t: DepTree, seed: int) -> Optional[CorruptionRecord]:
    cands = adv_att_candidates(t)
    if not cands:
        return None
    c = random.Random(seed).choice(cands)
    corrupted = swap_blocks(t.text, c["adv"], c["att"])
    return CorruptionRecord(t.text, corrupted, "adv_att", (c["adv"], c["att"]), seed)


def _clause_subject(t: DepTree, pred: int) -> Optional[int]:
    return next((c for c in t.children[pred] if t.tokens[c - 1].deprel == "SBV"), None)


def conjunction_candidates(t: DepTree, lex: ConjunctionLexicon) -> list[dict]:
    """Possible subject moves around a conjunction in the first of two coordinated clauses.

    The first clause is headed by the root predicate, the second by its first
    COO dependent. A second clause without its own subject shares the first one.
    """
    root = t.root
    second = next((c for c in t.children[root] if t.tokens[c - 1].deprel == "COO"), None)
    if second is None:
        return []
    subj = _clause_subject(t, root)
    if subj is None:
        return []
    subj_span = _contiguous_span(t, subj)
    if subj_span is None:
        return []
    second_subj = _clause_subject(t, second)
    subj_text = t.text[slice(*subj_span)]
    if second_subj is None:
        same = True
    else:
        span2 = subtree_span(t, second_subj).char_span
        same = t.text[slice(*span2)] == subj_text
    second_start = min(subtree_span(t, second).indices)
    subj_tokens = subtree_span(t, subj).indices
    lo, hi = min(subj_tokens), max(subj_tokens)
    out = []
    for tok in t.tokens:
        if tok.form not in lex or tok.index >= second_start or tok.index in subj_tokens:
            continue
        if not conjunction_ok(subj_span, tok.char_span, same):
            continue
        if same:
            # Subject ... conj  ->  conj subject ...
            moved = (t.tokens[hi].char_span[0], tok.char_span[1])
            spans = (subj_span, moved)
        else:
            # conj ... subject  ->  subject ... conj
            moved = (tok.char_span[0], t.tokens[lo - 2].char_span[1])
            spans = (moved, subj_span)
        out.append(dict(subject=subj_span, conj=tok.char_span, same=same, blocks=spans))
    return out


def corrupt_conjunction(t: DepTree, lex: ConjunctionLexicon, seed: int) -> Optional[CorruptionRecord]:
    cands = conjunction_candidates(t, lex)
    if not cands:
        return None
    c = random.Random(seed).choice(cands)
    corrupted = swap_blocks(t.text, *c["blocks"])
    if corrupted == t.text:
        return None
    return CorruptionRecord(t.text, corrupted, "conjunction", (c["subject"], c["conj"]), seed)


def is_entity(tok: Token) -> bool:
    """NER tag in MISC decides when present; otherwise fall back to name-like xpos tags."""
    misc = tok.misc_dict()
    for key in NER_KEYS:
        if key in misc:
            return misc[key] not in ("", "O", "_")
    return tok.xpos in ENTITY_XPOS


def drop_candidates(t: DepTree) -> list[tuple[str, Span, frozenset[int]]]:
    spo = find_spo(t)
    out = []
    for role in ("subject", "predicate", "object"):
        if role not in spo:
            continue
        i = spo[role]
        if role == "predicate":
            members = frozenset({i})
            span = t.tokens[i - 1].char_span
        else:
            sub = subtree_span(t, i)
            if not sub.contiguous:
                continue
            members, span = sub.indices, sub.char_span
        if any(is_entity(t.tokens[m - 1]) for m in members):
            continue
        if len(members) == len(t):
            continue
        out.append((role, span, members))
    return out


def _delete(text: str, span: Span) -> str:
    s, e = span
    # Remove one adjacent whitespace gap so spaced text does not gain a double space.
    tail = len(text[e:]) - len(text[e:].lstrip())
    if tail:
        return text[:s] + text[e + tail:]
    head = len(text[:s]) - len(text[:s].rstrip())
    return text[:s - head] + text[e:]


def corrupt_drop_spo(t: DepTree, seed: int) -> Optional[CorruptionRecord]:
    cands = drop_candidates(t)
    if not cands:
        return None
    role, span, _ = random.Random(seed).choice(cands)
    return CorruptionRecord(t.text, _delete(t.text, span), "drop_spo", (span,), seed, dropped_role=role)


def _subtree_root(t: DepTree, span: Span) -> int:
    return next(tok.index for tok in t.tokens if subtree_span(t, tok.index).char_span == tuple(span))


def placement_violated(rec: CorruptionRecord, t: DepTree, lex: Optional[ConjunctionLexicon] = None) -> bool:
    """Re-run a reorder rule's placement predicate on the corrupted string.

    Word positions in the corrupted text are obtained by mapping the source
    spans through the swap; the mapped substrings are checked to still read as
    the same words before the predicate is evaluated.
    """
    if rec.rule == "adv_att":
        adv, att = rec.affected_spans
        a, b = _subtree_root(t, adv), _subtree_root(t, att)
        roles = dict(adv=adv, att=att, verb=t[t[a].head].char_span, obj=t[t[b].head].char_span)
        blocks = (adv, att)
        moved = {k: map_after_swap(v, *blocks) for k, v in roles.items()}
        if any(rec.corrupted[slice(*moved[k])] != rec.source[slice(*roles[k])] for k in roles):
            raise ValueError("corrupted text does not match the recorded swap")
        return not adv_att_ok(**moved)
    if rec.rule == "conjunction":
        subj, conj = rec.affected_spans
        cand = next(c for c in conjunction_candidates(t, lex or ConjunctionLexicon.default())
                    if c["subject"] == subj and c["conj"] == conj)
        new_subj, new_conj = (map_after_swap(x, *cand["blocks"]) for x in (subj, conj))
        if (rec.corrupted[slice(*new_subj)] != rec.source[slice(*subj)]
                or rec.corrupted[slice(*new_conj)] != rec.source[slice(*conj)]):
            raise ValueError("corrupted text does not match the recorded move")
        return not conjunction_ok(new_subj, new_conj, cand["same"])
    raise ValueError(f"rule {rec.rule!r} has no placement predicate")


def apply_rule(rule: str, t: DepTree, seed: int, lex: Optional[ConjunctionLexicon] = None):
    if rule == "adv_att":
        return corrupt_adv_att(t, seed)
    if rule == "conjunction":
        return corrupt_conjunction(t, lex or ConjunctionLexicon.default(), seed)
    if rule == "drop_spo":
        return corrupt_drop_spo(t, seed)
    raise ValueError(f"unknown rule {rule!r}")


def _check_weights(weights: Sequence[float]) -> None:
    if len(weights) != len(RULES):
        raise ValueError(f"expected {len(RULES)} rule weights, got {len(weights)}")
    if any(w < 0 for w in weights) or not any(w > 0 for w in weights):
        raise ValueError("rule weights must be non-negative and not all zero")


def corrupt_one(t: DepTree, sid: str, weights: Sequence[float], rate: float, seed: int,
                lex: ConjunctionLexicon) -> Optional[CorruptionRecord]:
    """Selection, rule draw and fall-through for a single sentence."""
    sent_seed = derive_seed(seed, sid)
    rng = random.Random(sent_seed)
    if rng.random() >= rate:
        return None
    total = sum(weights)
    drawn = rng.choices(range(len(RULES)), weights=[w / total for w in weights])[0]
    by_weight = sorted((k for k in range(len(RULES)) if weights[k] > 0 and k != drawn),
                       key=lambda k: (-weights[k], k))
    for k in [drawn] + by_weight:
        rec = apply_rule(RULES[k], t, sent_seed, lex)
        if rec is not None:
            return rec
    return None


def corrupt_batch(trees: Sequence[DepTree], rule_mix: Sequence[float] = (1.0, 1.0, 1.0),
                  rate: float = 1.0, seed: int = 0, lex: Optional[ConjunctionLexicon] = None,
                  ids: Optional[Sequence[str]] = None) -> list[CorruptionRecord]:
    """One corruption per selected sentence; sentence ids default to ``sent_id`` or position."""
    _check_weights(rule_mix)
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"rate must lie in (0, 1], got {rate}")
    lex = lex or ConjunctionLexicon.default()
    out = []
    for n, t in enumerate(trees):
        sid = ids[n] if ids is not None else (t.sent_id or str(n))
        rec = corrupt_one(t, sid, rule_mix, rate, seed, lex)
        if rec is not None:
            out.append(rec)
    return out


def write_records(records: Sequence[CorruptionRecord], jsonl=None, tsv=None) -> None:
    """JSONL keeps full provenance; the TSV is ``corrupted<TAB>source`` for trainers."""
    for r in records:
        if jsonl is not None:
            jsonl.write(r.to_json() + "\n")
        if tsv is not None:
            tsv.write(f"{r.corrupted}\t{r.source}\n")
