"""Rule-generated corpora with known labels, for tests and demonstrations.

* :func:`segmentation_corpus`: parsed sentences whose discourse units start
  at every sentence start and at every token attached by ``mark``.
* :func:`connective_corpus`: clauses joined by single and multiword
  connectives, with forms like ``and`` or ``since`` that are connectives
  only in some contexts.
* :func:`headings_corpus`: headings without final punctuation between
  ordinary sentences.
* :func:`quoted_corpus`: quoted speech with sentence-final punctuation
  inside the quotes that must not end the sentence.
"""

import random

from .corpus import B_CONN, BEGIN_SEG, I_CONN, NO_SEG, OUT, Document, Sentence, Token

DETS = ["the", "a", "this", "every", "some"]
NOUNS = ["dog", "cat", "farmer", "child", "teacher", "river", "city", "report", "market",
         "garden", "student", "engine", "letter", "window", "doctor", "island", "village",
         "painter", "storm", "council"]
VERBS = ["saw", "found", "liked", "moved", "built", "opened", "followed", "helped",
         "watched", "answered", "painted", "visited", "carried", "described", "ignored"]
MARKS = ["because", "when", "if", "although", "while", "after", "before", "unless"]
ADJS = ["old", "small", "quiet", "bright", "famous", "green"]
GENRES = ["news", "fiction"]


class _Builder:
    """Accumulates (form, upos, head, deprel, seg, conn) rows for one sentence."""

    def __init__(self):
        self.rows = []

    def add(self, form, upos, head=0, deprel="dep", seg=NO_SEG, conn=OUT):
        self.rows.append([form, upos, head, deprel, seg, conn])
        return len(self.rows)

    def sentence(self, offset, capitalize=True):
        toks = []
        for i, (form, upos, head, deprel, seg, conn) in enumerate(self.rows, start=1):
            if i == 1 and capitalize:
                form = form[:1].upper() + form[1:]
            toks.append(Token(index=i, form=form, lemma=form.lower(), upos=upos, head=head,
                              deprel=deprel, seg_label=seg, conn_label=conn,
                              sent_initial=i == 1))
        return Sentence(tuple(toks), offset)


def _np(b, rng, head, deprel):
    """det (adj) noun attached to ``head``; returns the noun position."""
    det = b.add(rng.choice(DETS), "DET")
    adj = b.add(rng.choice(ADJS), "ADJ") if rng.random() < 0.3 else None
    noun = b.add(rng.choice(NOUNS), "NOUN", head, deprel)
    b.rows[det - 1][2] = noun
    if adj:
        b.rows[adj - 1][2] = noun
    return noun


def _clause(b, rng, head, deprel, mark=None):
    """[mark] subject verb object [as/with NP]; returns the verb position."""
    start = len(b.rows)
    m = b.add(mark, "SCONJ", -1, "mark", seg=BEGIN_SEG) if mark else None
    subj = _np(b, rng, -1, "nsubj")
    verb = b.add(rng.choice(VERBS), "VERB", head, deprel)
    obj = _np(b, rng, verb, "obj")
    if rng.random() < 0.35:
        # "as" also occurs as a preposition, which does not open a unit
        case = b.add(rng.choice(["as", "with"]), "ADP", -1, "case")
        obl = _np(b, rng, verb, "obl")
        b.rows[case - 1][2] = obl
    for row in b.rows[start:]:
        if row[2] == -1:
            row[2] = verb
    b.rows[subj - 1][2] = verb
    del obj
    if m:
        b.rows[m - 1][2] = verb
    return verb


def _segmentation_sentence(rng, offset, clause_rate):
    b = _Builder()
    if rng.random() < clause_rate:
        mark = rng.choice(MARKS + ["as"])
        if rng.random() < 0.5:
            # subordinate clause first: "When X, Y ."
            sub = _clause(b, rng, -2, "advcl", mark)
            b.add(",", "PUNCT", sub, "punct")
            main = _clause(b, rng, 0, "root")
            b.rows[sub - 1][2] = main
        else:
            main = _clause(b, rng, 0, "root")
            _clause(b, rng, main, "advcl", mark)
    else:
        main = _clause(b, rng, 0, "root")
    b.add(".", "PUNCT", main, "punct")
    b.rows[0][4] = BEGIN_SEG
    return b.sentence(offset)


def segmentation_corpus(n_docs=60, seed=0, clause_rate=0.43, sentences=(4, 9)):
    """Parsed documents; ``clause_rate`` is the chance that a sentence holds a
    subordinate clause. Half of those clauses open their sentence, so the
    share of sentence-internal units is about r/2 / (1 + r/2): 18% at the
    default, 30% at 0.86."""
    rng = random.Random(seed)
    docs = []
    for d in range(n_docs):
        n = rng.randint(*sentences)
        sents = tuple(_segmentation_sentence(rng, i, clause_rate) for i in range(n))
        genre = GENRES[d % len(GENRES)]
        docs.append(Document("%s_doc%03d" % (genre, d), sents, genre))
    return docs


CONNECTIVES = [("however",), ("therefore",), ("in", "addition"), ("as", "a", "result"),
               ("meanwhile",)]


def _conn_sentence(rng, offset):
    b = _Builder()
    r = rng.random()
    if r < 0.3:
        conn = rng.choice(CONNECTIVES)
        for k, form in enumerate(conn):
            b.add(form, "ADV", -1, "advmod", conn=B_CONN if k == 0 else I_CONN)
        b.add(",", "PUNCT", -1, "punct")
    elif r < 0.4:
        b.add("since", "SCONJ", -1, "mark", conn=B_CONN)
    main = _clause(b, rng, 0, "root")
    for row in b.rows:
        if row[2] == -1:
            row[2] = main
    r = rng.random()
    if r < 0.3:
        # clause coordination: a connective "and"
        b.add(",", "PUNCT", main, "punct")
        pos = b.add("and", "CCONJ", -1, "cc", conn=B_CONN)
        verb = _clause(b, rng, main, "conj")
        b.rows[pos - 1][2] = verb
    elif r < 0.55:
        # noun coordination: "and" that is not a connective
        pos = b.add("and", "CCONJ", -1, "cc")
        noun = _np(b, rng, main, "obj")
        b.rows[pos - 1][2] = noun
    elif r < 0.65:
        # "since" as a preposition
        case = b.add("since", "ADP", -1, "case")
        noun = b.add(rng.choice(["monday", "noon", "spring", "dawn"]), "NOUN", main, "obl")
        b.rows[case - 1][2] = noun
    b.add(".", "PUNCT", main, "punct")
    return b.sentence(offset)


def connective_corpus(n_docs=60, seed=0, sentences=(4, 9)):
    rng = random.Random(seed)
    docs = []
    for d in range(n_docs):
        n = rng.randint(*sentences)
        sents = tuple(_conn_sentence(rng, i) for i in range(n))
        docs.append(Document("conn_doc%03d" % d, sents, GENRES[d % 2]))
    return docs


HEADINGS = ["Introduction", "Background", "Methods", "Results", "Discussion", "Summary"]


def headings_corpus(n_docs=60, seed=0):
    """Documents of sections: a one-token heading (no final punctuation)
    followed by ordinary sentences."""
    rng = random.Random(seed)
    docs = []
    for d in range(n_docs):
        sents = []
        for h in rng.sample(HEADINGS, rng.randint(2, 4)):
            b = _Builder()
            b.add(h, "NOUN", 0, "root")
            sents.append(b.sentence(len(sents)))
            for _ in range(rng.randint(1, 3)):
                b = _Builder()
                main = _clause(b, rng, 0, "root")
                b.add(".", "PUNCT", main, "punct")
                sents.append(b.sentence(len(sents)))
        docs.append(Document("head_doc%03d" % d, tuple(sents), "academic"))
    return docs


def quoted_corpus(n_docs=60, seed=0):
    """Sentences of reported speech: ``the X said " go home . now . " .``;
    the periods inside the quotes do not end the sentence."""
    rng = random.Random(seed)
    docs = []
    for d in range(n_docs):
        sents = []
        for _ in range(rng.randint(4, 8)):
            b = _Builder()
            if rng.random() < 0.5:
                noun = _np(b, rng, -1, "nsubj")
                verb = b.add("said", "VERB", 0, "root")
                b.rows[noun - 1][2] = verb
                b.add('"', "PUNCT", verb, "punct")
                for _ in range(rng.randint(1, 3)):
                    v = b.add(rng.choice(["go", "stop", "wait", "look", "listen"]), "VERB",
                              verb, "ccomp")
                    b.add(rng.choice(["now", "here", "home", "again"]), "ADV", v, "advmod")
                    b.add(rng.choice([".", "!"]), "PUNCT", v, "punct")
                b.add('"', "PUNCT", verb, "punct")
                b.add(".", "PUNCT", verb, "punct")
            else:
                main = _clause(b, rng, 0, "root")
                b.add(".", "PUNCT", main, "punct")
            sents.append(b.sentence(len(sents)))
        docs.append(Document("quote_doc%03d" % d, tuple(sents), "fiction"))
    return docs


def split(docs, train=0.8, dev=0.1):
    """Contiguous train/dev/test split by document."""
    n = len(docs)
    a = int(round(n * train))
    b = a + int(round(n * dev))
    return docs[:a], docs[a:b], docs[b:]
