import io
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_tree, trees
from csedkit.deptree import make_tree, relationship, tree_distance
from csedkit.sampler import (DEFAULT_RELATIONS, PairExample, SamplerConfig, check_label, read_examples,
                             resolve_pair, sample_dsp, sample_dsp_plus, sample_drp, sample_dsrp, write_examples)

CFG = SamplerConfig()


def pairs(t, examples):
    return [resolve_pair(t, e) + (e.label,) for e in examples]


class TestDSP:
    def test_two_token_tree_is_forced(self):
        t = make_tree(["A", "B"], [2, 0], ["SBV", "HED"])
        assert sorted(pairs(t, sample_dsp(t, CFG))) == [(1, 2, "child"), (2, 1, "parent")]

    def test_single_token(self):
        assert sample_dsp(make_tree(["A"], [0], ["HED"]), CFG) == []

    def test_six_token_tree_checked_against_heads(self):
        t = random_tree(random.Random(11), 6)
        out = sample_dsp(t, SamplerConfig(pairs_per_sentence=4))
        assert len(out) == 4
        for i, j, label in pairs(t, out):
            assert t[i].head == j if label == "child" else t[j].head == i
        counts = [sum(e.label == c for e in out) for c in ("child", "parent")]
        assert abs(counts[0] - counts[1]) <= 1

    def test_flip_swaps_labels(self):
        t = make_tree(["A", "B"], [2, 0], ["SBV", "HED"])
        out = sample_dsp(t, SamplerConfig(flip=True))
        assert sorted(pairs(t, out)) == [(1, 2, "parent"), (2, 1, "child")]
        assert all(check_label(t, e, flip=True) for e in out)


class TestDSPPlus:
    def test_chain_endpoints_only_others(self):
        t = make_tree(["A", "B", "C"], [2, 3, 0], ["X", "X", "HED"])
        assert tree_distance(t, 1, 3) == 2
        out = sample_dsp_plus(t, SamplerConfig(pairs_per_sentence=6))
        others = {(i, j) for i, j, lab in pairs(t, out) if lab == "others"}
        assert others == {(1, 3), (3, 1)}

    def test_two_tokens_no_others(self):
        t = make_tree(["A", "B"], [2, 0], ["SBV", "HED"])
        assert all(e.label != "others" for e in sample_dsp_plus(t, SamplerConfig(pairs_per_sentence=9)))

    def test_eight_token_labels_verified(self):
        t = random_tree(random.Random(5), 8)
        out = sample_dsp_plus(t, SamplerConfig(pairs_per_sentence=6))
        assert {e.label for e in out} == {"child", "parent", "others"}
        for i, j, label in pairs(t, out):
            assert relationship(t, i, j).value == label

    def test_reservoir_path_is_uniform_enough(self):
        # Force the streaming branch with a tiny cap and check it still only emits far pairs.
        t = random_tree(random.Random(9), 10)
        out = sample_dsp_plus(t, SamplerConfig(pairs_per_sentence=9, others_cap=5))
        far = [(i, j) for i, j, lab in pairs(t, out) if lab == "others"]
        assert len(far) == 3 and all(tree_distance(t, i, j) > 1 for i, j in far)


class TestDRP:
    def test_punctuation_excluded(self):
        t = make_tree(["他", "来", "。"], [2, 0, 2], ["SBV", "HED", "WP"])
        assert "WP" not in DEFAULT_RELATIONS
        out = sample_drp(t, SamplerConfig(pairs_per_sentence=5))
        assert [e.label for e in out] == ["SBV"]

    def test_figure_pair(self, meeting):
        out = sample_drp(meeting, SamplerConfig(pairs_per_sentence=10))
        assert (2, 1, "ATT") in pairs(meeting, out)
        assert meeting.text[slice(*out[0].span_i)] in meeting.text

    def test_label_subset(self):
        t = make_tree(["他", "吃", "红", "苹果"], [2, 0, 4, 2], ["SBV", "HED", "ATT", "VOB"])
        out = sample_drp(t, SamplerConfig(pairs_per_sentence=10))
        assert sorted(e.label for e in out) == ["ATT", "SBV", "VOB"]


class TestDSRP:
    def test_single_token(self):
        assert sample_dsrp(make_tree(["A"], [0], ["HED"]), CFG) == []

    @pytest.mark.parametrize("plus, tags", [(False, {"DSP", "DRP"}), (True, {"DSP+", "DRP"})])
    def test_task_tags(self, meeting, plus, tags):
        assert {e.task for e in sample_dsrp(meeting, CFG, plus=plus)} <= tags

    def test_deterministic_bytes(self, meeting):
        def dump():
            buf = io.StringIO()
            write_examples(sample_dsrp(meeting, SamplerConfig(seed=42), plus=True), buf)
            return buf.getvalue()
        assert dump() == dump()

    def test_seed_changes_choice(self):
        t = random_tree(random.Random(2), 12)
        outs = {tuple(sample_dsp(t, SamplerConfig(seed=s))) for s in range(10)}
        assert len(outs) > 1


class TestWrite:
    def test_empty(self):
        buf = io.StringIO()
        assert write_examples([], buf) == 0 and buf.getvalue() == ""

    def test_round_trip(self, meeting):
        exs = sample_dsrp(meeting, CFG)[:3]
        buf = io.StringIO()
        assert write_examples(exs, buf) == 3
        assert read_examples(io.StringIO(buf.getvalue())) == exs
        assert buf.getvalue().count("\n") == 3

    def test_multichar_spans_cover_words(self, meeting):
        for e in sample_dsrp(meeting, SamplerConfig(pairs_per_sentence=8)):
            i, j = resolve_pair(meeting, e)
            assert e.text[slice(*e.span_i)] == meeting[i].form
            assert e.text[slice(*e.span_j)] == meeting[j].form

    def test_field_order(self):
        line = PairExample("甲乙", (0, 1), (1, 2), "DSP", "child", "s1").to_json()
        assert line == '{"text": "甲乙", "span_i": [0, 1], "span_j": [1, 2], "task": "DSP", "label": "child", "source_id": "s1"}'


class TestConfig:
    def test_bad_configs(self):
        with pytest.raises(ValueError):
            SamplerConfig(pairs_per_sentence=0)
        with pytest.raises(ValueError):
            SamplerConfig(relation_set=())
        with pytest.raises(ValueError):
            SamplerConfig(relation_set=("SBV", "SBV"))


@given(trees(max_size=12), st.integers(1, 8), st.integers(0, 1000), st.booleans())
@settings(max_examples=80)
def test_sampler_laws(t, k, seed, flip):
    cfg = SamplerConfig(pairs_per_sentence=k, seed=seed, flip=flip)
    arcs = len(t) - 1
    n = len(t)
    far = sum(1 for i in range(1, n + 1) for j in range(1, n + 1) if i != j and tree_distance(t, i, j) > 1)
    for plus in (False, True):
        out = sample_dsrp(t, cfg, plus=plus)
        assert all(check_label(t, e, flip=flip) for e in out)
        keys = [(e.span_i, e.span_j, e.task) for e in out]
        assert len(keys) == len(set(keys))
        structure = [e for e in out if e.task != "DRP"]
        supply = 2 * arcs + (far if plus else 0)
        assert len(structure) <= min(k, supply)
        assert out == sample_dsrp(t, cfg, plus=plus)
