import logging
from collections import Counter
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from gumdrop.corpus import B_CONN, I_CONN, OUT, Document, Sentence, Token
from gumdrop.lexicons import (ConnectiveTable, InitialTokenLexicon, build_connective_table,
                              build_initial_lexicon, conn_spans, exact_ratio,
                              exclusive_conn_baseline, freq_conn_predict, punct_split)


def conn_doc(pairs, name="d"):
    """Single-sentence document from (form, conn label) pairs."""
    toks = tuple(Token(index=i, form=f, conn_label=lab, sent_initial=i == 1)
                 for i, (f, lab) in enumerate(pairs, start=1))
    return Document(name, (Sentence(toks, 0),))


def labeled(text):
    """'however/B the cat as/B if/I' -> (form, label) pairs; bare words are O."""
    out = []
    for item in text.split():
        form, _, tag = item.partition("/")
        out.append((form, {"B": B_CONN, "I": I_CONN}.get(tag, OUT)))
    return out


# initial-token lexicon

def test_initial_lexicon_thresholds():
    paras = ["Thus it went ."] * 20 + ["and thus again"] * 5 + ["Rarely so ."] * 5
    lex = build_initial_lexicon(paras)
    assert lex.entries["Thus"] == (20, 20, 1.0)
    assert "Rarely" not in lex
    paras = ["Yes we did ."] * 20 + ["we said Yes"] * 5
    assert build_initial_lexicon(paras).entries["Yes"] == (20, 25, 0.8)
    assert len(build_initial_lexicon([])) == 0


def test_initial_lexicon_first_sentence_only():
    lex = build_initial_lexicon(["Hi . So we go"] * 12, min_freq=10)
    assert "Hi" in lex and "So" not in lex


@given(st.lists(st.lists(st.sampled_from(["A", "b", "C", "d", "."]), min_size=1, max_size=6)
                .map(" ".join), max_size=60),
       st.integers(0, 4), st.sampled_from([0.0, 0.3, 0.5]))
@settings(max_examples=60, deadline=None)
def test_initial_lexicon_entries_pass_thresholds_on_rescan(paras, min_freq, min_ratio):
    lex = build_initial_lexicon(paras, min_freq, min_ratio)
    for form, (ini, tot, ratio) in lex.entries.items():
        first = sum(1 for p in paras if p.split(".")[0].split()[:1] == [form])
        assert ini == first > min_freq
        assert tot == sum(p.split().count(form) for p in paras)
        assert ratio > min_ratio and 0 <= ratio <= 1
    assert InitialTokenLexicon.from_text(lex.to_text()).entries == lex.entries


# connective table

FIXTURE = [
    conn_doc(labeled("however/B we left . however/B it rained . as/B if/I nothing")),
    conn_doc(labeled("however/B late . however they stayed as/B if/I bored")),
]


def _recount(docs, seq):
    seq = tuple(seq)
    conn = total = 0
    for d in docs:
        forms = [t.form for t in d.tokens]
        labs = [t.conn_label for t in d.tokens]
        for i in range(len(forms) - len(seq) + 1):
            if tuple(forms[i:i + len(seq)]) == seq:
                total += 1
                end = i + len(seq)
                if labs[i] == B_CONN and all(l == I_CONN for l in labs[i + 1:end]) and \
                        (end == len(labs) or labs[end] != I_CONN):
                    conn += 1
    return Fraction(conn, total)


def test_connective_table_ratios():
    table = build_connective_table(FIXTURE)
    assert exact_ratio(table, ["however"]) == Fraction(3, 4) == _recount(FIXTURE, ["however"])
    assert exact_ratio(table, ["as", "if"]) == 1 == _recount(FIXTURE, ["as", "if"])
    assert ("nothing",) not in table.entries
    assert ConnectiveTable.from_text(table.to_text()).entries == table.entries


def test_long_spans_are_truncated_with_a_warning(caplog):
    doc = conn_doc(labeled("a/B b/I c/I d/I e/I f/I g"))
    with caplog.at_level(logging.WARNING):
        table = build_connective_table([doc])
    assert list(table.entries) == [("a", "b", "c", "d", "e")]
    assert "truncated" in caplog.text


@st.composite
def labeled_docs(draw):
    docs = []
    for k in range(draw(st.integers(1, 3))):
        forms = draw(st.lists(st.sampled_from("xyz"), min_size=1, max_size=12))
        labs, prev = [], OUT
        for _ in forms:
            lab = draw(st.sampled_from([OUT, OUT, B_CONN] + ([I_CONN] if prev != OUT else [])))
            labs.append(lab)
            prev = lab
        docs.append(conn_doc(list(zip(forms, labs)), "d%d" % k))
    return docs


@given(labeled_docs())
@settings(max_examples=80, deadline=None)
def test_table_ratios_equal_brute_force_recounts(docs):
    table = build_connective_table(docs)
    spans = Counter()
    for d in docs:
        forms = [t.form for t in d.tokens]
        for s, e in conn_spans([t.conn_label for t in d.tokens]):
            spans[tuple(forms[s:min(e, s + 5)])] += 1
    assert set(table.entries) == set(spans)
    for seq, (c, t, _) in table.entries.items():
        total = sum(1 for d in docs for i in range(len(d) - len(seq) + 1)
                    if tuple(x.form for x in d.tokens[i:i + len(seq)]) == seq)
        assert Fraction(c, t) == Fraction(spans[seq], total)
        assert 0 < Fraction(c, t) <= 1


def test_freq_conn_predict():
    table = ConnectiveTable({("so",): (6, 10, 0.6), ("so", "that"): (3, 10, 0.3),
                             ("in", "the", "end"): (2, 2, 1.0)})
    doc = conn_doc(labeled("so that in the end unknown"))
    out = freq_conn_predict(doc, table)
    assert out[0] == (0.3, 10, "B") and out[1] == (0.3, 10, "I")
    assert out[3] == (1.0, 2, "I") and out[4] == (1.0, 2, "I")
    assert out[5] == (0.0, 0, "O")


def test_freq_conn_length_tie_prefers_higher_ratio():
    table = ConnectiveTable({("a", "b"): (1, 10, 0.1), ("b", "c"): (9, 10, 0.9)})
    assert freq_conn_predict(conn_doc(labeled("a b c")), table)[1] == (0.9, 10, "B")


# punctuation splitter and baseline

def test_punct_split():
    assert punct_split("Hello . World !".split()) == [True, False, True, False]
    assert punct_split("no punctuation here".split()) == [True, False, False]
    assert punct_split(["你好", "。", "再见"]) == [True, False, True]
    assert punct_split([]) == []


@given(st.lists(st.sampled_from(["a", ".", "b?", "c", "!"]), max_size=15))
def test_punct_split_is_position_local(forms):
    flags = punct_split(forms)
    for i in range(1, len(forms)):
        assert flags[i] == punct_split(forms[i - 1:i + 1])[1]
    assert punct_split(forms) == flags


def test_exclusive_baseline_examples():
    train = [conn_doc(labeled("but/B yes . but/B no . so/B it so"))]
    test = conn_doc(labeled("but so never"))
    assert exclusive_conn_baseline(train, test) == [B_CONN, OUT, OUT]
    nine = [conn_doc(labeled(" ".join(["then/B"] * 9 + ["then"])))]
    assert exclusive_conn_baseline(nine, conn_doc(labeled("then"))) == [OUT]


@given(labeled_docs())
@settings(max_examples=80, deadline=None)
def test_exclusive_baseline_is_precise_on_training_data(docs):
    for d in docs:
        pred = exclusive_conn_baseline(docs, d)
        for p, t in zip(pred, d.tokens):
            if p == B_CONN:
                assert t.conn_label in (B_CONN, I_CONN)
