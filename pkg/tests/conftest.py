import pytest

from gumdrop import corpus, synthetic
from gumdrop.corpus import Document, Sentence, Token

# Small learner settings keep ensemble tests fast on one core.
FAST_LEARNERS = {
    "forest": {"n_trees": 15, "max_depth": 8},
    "extratrees": {"n_trees": 15, "max_depth": 8},
    "gbt": {"n_trees": 25, "max_depth": 3},
    "subtree": {"n_trees": 25, "max_depth": 3},
    "mlp": {"epochs": 3, "windows": (5,), "hidden_dims": (16,), "embed_dim": 8},
    "lr": {"reg_grid": (0.1,)},
    "wiki": {"min_freq": 3},
}

# "allowed as ants when given the choice ignore poison": the clause headed by
# "given" is an advcl of "ignore", itself an advcl of the root "allowed".
NESTED_ADVCL = [
    # index, form, head, deprel
    (1, "allowed", 0, "root"),
    (2, "as", 8, "mark"),
    (3, "ants", 8, "nsubj"),
    (4, "when", 5, "mark"),
    (5, "given", 8, "advcl"),
    (6, "the", 7, "det"),
    (7, "choice", 5, "obj"),
    (8, "ignore", 1, "advcl"),
    (9, "poison", 8, "obj"),
]


def make_sentence(rows, offset=0, upos="X"):
    toks = tuple(Token(index=i, form=f, lemma=f, upos=upos, head=h, deprel=r,
                       sent_initial=i == 1) for i, f, h, r in rows)
    return Sentence(toks, offset)


def make_doc(name, sentences, genre="_"):
    """Document from lists of forms; the first token of each sentence is BeginSeg."""
    sents = []
    for k, forms in enumerate(sentences):
        toks = tuple(Token(index=i, form=f, upos="X", head=0 if i == 1 else 1,
                           deprel="root" if i == 1 else "dep",
                           seg_label=corpus.BEGIN_SEG if i == 1 else corpus.NO_SEG,
                           sent_initial=i == 1)
                     for i, f in enumerate(forms, start=1))
        sents.append(Sentence(toks, k))
    return Document(name, tuple(sents), genre)


@pytest.fixture
def nested_advcl():
    return make_sentence(NESTED_ADVCL)


@pytest.fixture(scope="session")
def seg_corpus():
    return synthetic.segmentation_corpus(60, seed=11)


@pytest.fixture(scope="session")
def conn_corpus():
    return synthetic.connective_corpus(60, seed=12)
