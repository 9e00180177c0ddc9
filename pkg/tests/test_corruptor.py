import io
import json
import random
from collections import Counter
from math import sqrt

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import adv_att_tree, all_rules_tree, conj_diff_tree, conj_same_tree, spo_tree
from csedkit.corruptor import (RULES, ConjunctionLexicon, corrupt_adv_att, corrupt_batch, corrupt_conjunction,
                               corrupt_drop_spo, is_entity, map_after_swap, placement_violated, swap_blocks,
                               write_records)
from csedkit.deptree import make_tree, subtree_span

LEX = ConjunctionLexicon.default()


def words_in_order(text, forms):
    """Re-tokenize ``text`` greedily against a known word list; returns the word order."""
    out, pos, pool = [], 0, sorted(set(forms), key=len, reverse=True)
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        w = next(f for f in pool if text.startswith(f, pos))
        out.append(w)
        pos += len(w)
    return out


class TestSwap:
    @given(st.text(max_size=20), st.data())
    def test_swap_and_map(self, text, data):
        cuts = sorted(data.draw(st.lists(st.integers(0, len(text)), min_size=4, max_size=4)))
        a, b, c, d = cuts
        out = swap_blocks(text, (a, b), (c, d))
        assert sorted(out) == sorted(text)
        for span in ((a, b), (c, d), (b, c)):
            s, e = map_after_swap(span, (a, b), (c, d))
            assert out[s:e] == text[slice(*span)]


class TestAdvAtt:
    def test_no_adv(self):
        t = make_tree(["他", "吃", "苹果"], [2, 0, 2], ["SBV", "HED", "VOB"], upos=["PRON", "VERB", "NOUN"])
        assert corrupt_adv_att(t, 0) is None

    def test_non_contiguous_adv(self):
        # ADV subtree {1, 3} skips the verb at 2.
        t = make_tree(["在", "看", "里", "新", "书"], [2, 0, 1, 5, 2], ["ADV", "HED", "POB", "ATT", "VOB"],
                      upos=["ADP", "VERB", "NOUN", "ADJ", "NOUN"])
        assert not subtree_span(t, 1).contiguous
        assert corrupt_adv_att(t, 0) is None

    def test_string_surgery(self):
        t = make_tree(["他", "认真", "讨论", "重要", "问题"], [3, 3, 0, 5, 3], ["SBV", "ADV", "HED", "ATT", "VOB"],
                      upos=["PRON", "ADV", "VERB", "ADJ", "NOUN"])
        rec = corrupt_adv_att(t, 1)
        assert rec.corrupted == "他重要讨论认真问题"
        assert Counter(rec.corrupted) == Counter(rec.source)
        assert len(words_in_order(rec.corrupted, [tok.form for tok in t.tokens])) == len(t)
        assert placement_violated(rec, t)


class TestConjunction:
    def test_no_conjunction(self):
        t = make_tree(["他", "唱", "歌", "，", "跳", "舞"], [2, 0, 2, 2, 2, 5], ["SBV", "HED", "VOB", "WP", "COO", "VOB"],
                      upos=["PRON", "VERB", "NOUN", "PUNCT", "VERB", "NOUN"])
        assert corrupt_conjunction(t, LEX, 0) is None

    def test_same_subject_moves_after(self):
        t = conj_same_tree(random.Random(0))
        rec = corrupt_conjunction(t, LEX, 0)
        subj = t[1].form
        assert rec.corrupted.replace(" ", "").startswith("不仅" + subj)
        order = words_in_order(rec.corrupted, [tok.form for tok in t.tokens])
        assert order.index(subj) > order.index("不仅")
        assert placement_violated(rec, t)

    def test_different_subjects_move_before(self):
        t = conj_diff_tree(random.Random(1))
        rec = corrupt_conjunction(t, LEX, 0)
        forms = [tok.form for tok in t.tokens]
        order = words_in_order(rec.corrupted, forms)
        assert Counter(order) == Counter(forms)
        assert order.index(t[2].form) < order.index("不仅")
        assert placement_violated(rec, t)

    def test_already_wrong_placement_is_left_alone(self):
        # Shared subject already after the conjunction: nothing to break.
        t = make_tree(["不仅", "他", "唱", "歌", "，", "而且", "跳", "舞"], [3, 3, 0, 3, 3, 7, 3, 7],
                      ["ADV", "SBV", "HED", "VOB", "WP", "ADV", "COO", "VOB"],
                      upos=["CCONJ", "PRON", "VERB", "NOUN", "PUNCT", "CCONJ", "VERB", "NOUN"])
        assert corrupt_conjunction(t, LEX, 0) is None


class TestDropSPO:
    def test_drop_subject(self):
        t = make_tree(["他", "吃", "苹果"], [2, 0, 2], ["SBV", "HED", "VOB"], sep=" ")
        rec = next(r for r in (corrupt_drop_spo(t, s) for s in range(50)) if r.dropped_role == "subject")
        assert rec.corrupted == "吃 苹果"
        assert rec.corrupted.split() == [tok.form for tok in t.tokens if tok.index not in {1}]

    def test_named_subject_excluded(self):
        t = make_tree(["张三", "吃", "苹果"], [2, 0, 2], ["SBV", "HED", "VOB"], xpos=["nh", "v", "n"])
        roles = {corrupt_drop_spo(t, s).dropped_role for s in range(60)}
        assert roles == {"predicate", "object"}

    def test_all_entities(self):
        t = spo_tree(random.Random(0), entity_roles=("subject", "predicate", "object"))
        assert corrupt_drop_spo(t, 0) is None

    def test_misc_tag_overrides_xpos(self):
        t = make_tree(["张三", "走"], [2, 0], ["SBV", "HED"], xpos=["nh", "v"], misc=["NER=O", "_"])
        assert not is_entity(t[1])
        t = make_tree(["那边", "走"], [2, 0], ["SBV", "HED"], xpos=["n", "v"], misc=["NER=S-LOC", "_"])
        assert is_entity(t[1])


class TestBatch:
    def test_tiny_rate_selects_nothing(self):
        trees = [adv_att_tree(random.Random(i)) for i in range(20)]
        assert corrupt_batch(trees, rate=1e-12, seed=3) == []

    def test_single_rule_weights(self):
        trees = [all_rules_tree(random.Random(i)) for i in range(30)]
        assert {r.rule for r in corrupt_batch(trees, (0, 0, 1), seed=1)} == {"drop_spo"}

    def test_rule_frequencies_uniform(self):
        trees = [all_rules_tree(random.Random(i)) for i in range(100)]
        recs = corrupt_batch(trees, (1, 1, 1), seed=2024)
        assert len(recs) == 100
        counts = Counter(r.rule for r in recs)
        sigma = sqrt(100 * (1 / 3) * (2 / 3))
        for rule in RULES:
            assert abs(counts[rule] - 100 / 3) <= 3 * sigma

    def test_fall_through(self):
        # Only drop_spo applies; a draw of another rule falls through to it.
        trees = [spo_tree(random.Random(i)) for i in range(20)]
        recs = corrupt_batch(trees, (5, 5, 1), seed=0)
        assert len(recs) == 20 and {r.rule for r in recs} == {"drop_spo"}

    def test_invalid_weights(self):
        with pytest.raises(ValueError):
            corrupt_batch([], (0, 0, 0))
        with pytest.raises(ValueError):
            corrupt_batch([], (-1, 1, 1))

    def test_deterministic(self):
        trees = [all_rules_tree(random.Random(i)) for i in range(25)]
        assert corrupt_batch(trees, rate=0.5, seed=9) == corrupt_batch(trees, rate=0.5, seed=9)
        assert len(corrupt_batch(trees, rate=0.5, seed=9)) <= 25

    def test_outputs(self):
        recs = corrupt_batch([spo_tree(random.Random(0))], seed=0)
        js, tsv = io.StringIO(), io.StringIO()
        write_records(recs, jsonl=js, tsv=tsv)
        d = json.loads(js.getvalue())
        assert list(d) == ["source", "corrupted", "rule", "spans", "dropped_role", "seed"]
        assert tsv.getvalue() == f"{recs[0].corrupted}\t{recs[0].source}\n"


def test_lexicon_validation():
    with pytest.raises(ValueError):
        ConjunctionLexicon(())
    with pytest.raises(ValueError):
        ConjunctionLexicon(("而且", "而且"))
    assert len(LEX.entries) == 10
