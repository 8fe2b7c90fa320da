import pytest

from synkw import synthetic
from synkw.pipeline import Lexicons, PairDataset
from synkw.text_core import AUXILIARY, CONTENT, INTERJECTION, PosLexicon


def make_pos_lexicon(entries):
    return PosLexicon(dict(entries), max((len(s) for s in entries), default=1))


@pytest.fixture
def cn_lexicon():
    """Small hand lexicon used by the worked examples."""
    return make_pos_lexicon({
        "金": CONTENT, "市场": CONTENT, "价格": CONTENT, "查询": CONTENT,
        "的": AUXILIARY, "嗯": INTERJECTION, "哼": INTERJECTION,
    })


@pytest.fixture(scope="session")
def synth_lexicons():
    pos = make_pos_lexicon(dict(synthetic.pos_lexicon_rows()))
    return Lexicons(pos, dict(synthetic.category_rows()))


@pytest.fixture(scope="session")
def synth_corpus():
    return synthetic.generate(n_bases=40, variants_per_base=4, seed=11)


@pytest.fixture(scope="session")
def synth_seed_dataset(synth_corpus):
    return PairDataset.from_pairs(synth_corpus.seed_pairs)
