import random
import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from csedkit.deptree import make_tree  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"
CHARS = "的一是了我不人在他有这个上们来到时大地为子中你说生国年着就那和要她出也得里后自以会家可下而过天去能对小多然于心学么之都好看起发当没成只如事把还用第样道想作种开美总从无情己面最女但现前些所同日手又行意动方期它头经长儿回位分爱老因很给名法间斯知世什两次使身者被高已亲其进此话常与活正感"
LABELS = ("SBV", "VOB", "ATT", "ADV", "COO", "WP", "RAD", "LAD", "POB", "CMP")
UPOS = ("VERB", "NOUN", "ADV", "ADJ", "PUNCT", "PRON")


def random_tree(rng: random.Random, n: int, sep: str = ""):
    order = list(range(1, n + 1))
    rng.shuffle(order)
    heads = [0] * n
    placed = [order[0]]
    for node in order[1:]:
        heads[node - 1] = rng.choice(placed)
        placed.append(node)
    forms = ["".join(rng.choice(CHARS) for _ in range(rng.randint(1, 3))) for _ in range(n)]
    deprels = ["HED" if h == 0 else rng.choice(LABELS) for h in heads]
    upos = [rng.choice(UPOS) for _ in range(n)]
    return make_tree(forms, heads, deprels, upos=upos, sep=sep)


@st.composite
def trees(draw, min_size=1, max_size=12):
    n = draw(st.integers(min_size, max_size))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_tree(random.Random(seed), n)


@pytest.fixture
def meeting():
    """Incorrect sentence from the word-order example, parsed LTP-style."""
    forms = ["全厂", "职工", "讨论", "并", "听取", "了", "报告"]
    heads = [2, 3, 0, 5, 3, 5, 5]
    deprels = ["ATT", "SBV", "HED", "LAD", "COO", "RAD", "VOB"]
    upos = ["NOUN", "NOUN", "VERB", "CCONJ", "VERB", "PART", "NOUN"]
    return make_tree(forms, heads, deprels, upos=upos)
