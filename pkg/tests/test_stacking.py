import logging

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from gumdrop import synthetic
from gumdrop.corpus import BEGIN_SEG, NO_SEG
from gumdrop.errors import CoverageError, FoldError, GumdropError
from gumdrop.features import TokenFeaturizer
from gumdrop.learners import Dataset, predict_labels
from gumdrop.pipelines.config import LEARNER_DEFAULTS
from gumdrop.pipelines.modules import BOWCounter, WindowSentencer
from gumdrop.stacking import (BaseModule, ExternalModule, MultitrainMatrix, assemble_meta,
                              ingest_external, label_f1, make_folds, multitrain, read_column,
                              token_keys, train_meta)

from conftest import make_doc


class ConstantModule(BaseModule):
    id = "const"
    components = (BEGIN_SEG, NO_SEG)

    def fit(self, docs):
        return self

    def predict(self, docs):
        n = sum(len(d) for d in docs)
        return self.column(docs, [NO_SEG] * n, [[0.25, 0.75]] * n)


class OracleModule(ConstantModule):
    id = "oracle"

    def predict(self, docs):
        labels = [t.seg_label for d in docs for t in d.tokens]
        return self.column(docs, labels, [[float(l == BEGIN_SEG), float(l != BEGIN_SEG)]
                                          for l in labels])


class FailingModule(ConstantModule):
    id = "broken"

    def fit(self, docs):
        raise RuntimeError("boom")


def small_docs(n_docs, n_sents=3):
    return [make_doc("doc%d" % i, [["w%d" % j, "x", "."] for j in range(n_sents)])
            for i in range(n_docs)]


# folds

@pytest.mark.parametrize("n,size", [(10, 2), (5, 1)])
def test_document_folds_are_even(n, size):
    folds = make_folds(small_docs(n), 5, seed=1)
    assert folds.level == "document"
    assert sorted(list(folds.folds.values()).count(f) for f in range(5)) == [size] * 5


def test_few_documents_fall_back_to_sentence_folds():
    docs = small_docs(3)
    folds = make_folds(docs, 5, seed=0)
    assert folds.level == "sentence"
    seen = []
    for f in range(5):
        train, held = folds.split(docs, f)
        seen += token_keys(held)
        assert not set(token_keys(train)) & set(token_keys(held))
    assert sorted(seen) == sorted(token_keys(docs))


def test_fold_errors():
    with pytest.raises(ValueError):
        make_folds([], 5)
    with pytest.raises(ValueError):
        make_folds(small_docs(1, 2), 5)


@given(st.integers(1, 14), st.integers(2, 6), st.integers(0, 2**31))
@settings(max_examples=60, deadline=None)
def test_folds_partition_tokens_for_any_seed(n_docs, k, seed):
    docs = small_docs(n_docs, 3)
    assume(3 * n_docs >= k)
    folds = make_folds(docs, k, seed)
    held = [key for f in range(k) for key in token_keys(folds.split(docs, f)[1])]
    assert sorted(held) == sorted(token_keys(docs))
    if folds.level == "document":
        sizes = [list(folds.folds.values()).count(f) for f in range(k)]
        assert max(sizes) - min(sizes) <= 1


# multitraining

def test_constant_and_oracle_columns(seg_corpus):
    docs = seg_corpus[:10]
    folds = make_folds(docs, 5, 0)
    const = multitrain(ConstantModule(), docs, folds)
    assert set(const.labels) == {NO_SEG} and np.all(const.values == [0.25, 0.75])
    oracle = multitrain(OracleModule(), docs, folds)
    assert oracle.labels == [t.seg_label for d in docs for t in d.tokens]
    assert oracle.keys == token_keys(docs)


def test_no_fold_trains_on_the_tokens_it_predicts(seg_corpus):
    docs = seg_corpus[:12]
    audit = []
    multitrain(OracleModule(), docs, make_folds(docs, 5, 3), audit=audit)
    assert len(audit) == 5
    for entry in audit:
        assert not entry["train"] & entry["predict"]
    assert frozenset().union(*(e["predict"] for e in audit)) == frozenset(token_keys(docs))


def test_fold_failure_names_the_fold(seg_corpus):
    with pytest.raises(FoldError) as err:
        multitrain(FailingModule(), seg_corpus[:5], make_folds(seg_corpus[:5], 5, 0))
    assert err.value.fold == 0 and "boom" in str(err.value)


def test_cache_reload_is_identical(tmp_path, seg_corpus):
    docs = seg_corpus[:10]
    folds = make_folds(docs, 5, 0)
    module = BOWCounter(size=50, reg_grid=(1.0,))
    first = multitrain(module, docs, folds, cache_dir=str(tmp_path))
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    again = multitrain(module, docs, folds, cache_dir=str(tmp_path))
    assert again.to_text() == first.to_text() == files[0].read_text(encoding="utf-8")
    # another config gets its own cache entry
    multitrain(BOWCounter(size=20, reg_grid=(1.0,)), docs, folds, cache_dir=str(tmp_path))
    assert len(list(tmp_path.iterdir())) == 2


def test_parallel_folds_match_serial(seg_corpus):
    docs = seg_corpus[:10]
    folds = make_folds(docs, 5, 0)
    module = BOWCounter(size=50, reg_grid=(1.0,))
    assert multitrain(module, docs, folds, jobs=3).to_text() == \
        multitrain(module, docs, folds).to_text()


def test_out_of_fold_predictions_differ_from_in_sample():
    docs = synthetic.headings_corpus(15, seed=4)
    lr = LEARNER_DEFAULTS["lr"]
    module = WindowSentencer("lr", "logistic", lr["window"], lr["features"], {"reg_grid": (1.0,)})
    honest = multitrain(module, docs, make_folds(docs, 5, 0))
    cheating = module.clone().fit(docs).predict(docs)
    gold = np.array([t.sent_initial for d in docs for t in d.tokens])
    assert not np.allclose(honest.values, cheating.values)

    def gold_mass(col):
        return float(np.mean(np.where(gold, col.values[:, 1], col.values[:, 0])))
    assert gold_mass(cheating) > gold_mass(honest)


# metalearner inputs

def _features(docs):
    fz = TokenFeaturizer().fit(docs)
    return [fz.doc_features(d, syntax=True) for d in docs]


def test_meta_record_width_and_sentinels(seg_corpus):
    docs = seg_corpus[:3]
    a, b = ConstantModule(), OracleModule()
    matrix = MultitrainMatrix((m.id, m.predict(docs)) for m in (a, b))
    ds = assemble_meta(matrix, docs, _features(docs), ["upos", "case", "tok_len"], 3)
    assert len(ds) == sum(len(d) for d in docs)
    assert all(len(r) == 2 * (2 + 1) + 3 * 3 for r in ds.records)
    first = ds.records[0]
    assert first["upos@-1"] == "<s>" and first["tok_len@-1"] == 0.0
    assert first["oracle:label"] == BEGIN_SEG and first["const:NoSeg"] == 0.75
    assert ds.labels == [t.seg_label for d in docs for t in d.tokens]


def test_missing_module_column(seg_corpus):
    docs = seg_corpus[:2]
    matrix = MultitrainMatrix(const=ConstantModule().predict(docs))
    with pytest.raises(GumdropError, match="missing module column"):
        assemble_meta(matrix, docs, _features(docs), ["upos"], required=["oracle"])


def test_sentence_count_is_broadcast_to_tokens(seg_corpus):
    docs = seg_corpus[:20]
    col = BOWCounter(size=50, reg_grid=(1.0,)).fit(docs).predict(docs[:2])
    k = 0
    for d in docs[:2]:
        for s in d.sentences:
            block = col.values[k:k + len(s), 0]
            assert np.all(block == block[0])
            assert len(set(col.labels[k:k + len(s)])) == 1
            k += len(s)


# metalearner selection

def _xor_ds(n, seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 2, (n, 2))
    records = [{"m:a": float(x), "m:b": float(y)} for x, y in X]
    labels = [BEGIN_SEG if x != y else NO_SEG for x, y in X]
    return Dataset.build(records, labels)


def test_single_candidate_is_returned():
    ds = _xor_ds(40, 0)
    model = train_meta(ds, ["forest"], ds, {BEGIN_SEG}, {"forest": {"n_trees": 3}})
    assert model.kind == "forest" and "dev_f" in model.info


def test_planted_interaction_selects_boosting():
    ds, dev = _xor_ds(200, 1), _xor_ds(100, 2)
    params = {"forest": {"n_trees": 20, "max_depth": 1}, "gbt": {"n_trees": 30, "max_depth": 2}}
    model = train_meta(ds, ["forest", "gbt"], dev, {BEGIN_SEG}, params)
    assert model.kind == "gbt"
    scores = model.info["dev_scores"]
    assert scores["gbt"] == label_f1(dev.labels, predict_labels(model, dev), {BEGIN_SEG}) == 1.0
    assert scores["forest"] < scores["gbt"]


def test_ties_go_to_the_earlier_candidate():
    ds = _xor_ds(80, 3)
    params = {k: {"n_trees": 10, "max_depth": 3} for k in ("extratrees", "gbt")}
    model = train_meta(ds, ["extratrees", "gbt"], ds, {BEGIN_SEG}, params)
    assert model.info["dev_scores"]["extratrees"] == model.info["dev_scores"]["gbt"] == 1.0
    assert model.kind == "extratrees"
    again = train_meta(ds, ["extratrees", "gbt"], ds, {BEGIN_SEG}, params)
    assert again.to_bytes() == model.to_bytes()


def test_all_candidates_failing(caplog):
    ds = _xor_ds(10, 0)
    with caplog.at_level(logging.WARNING), pytest.raises(GumdropError, match="every"):
        train_meta(ds, ["nonsense"], ds, {BEGIN_SEG})
    with pytest.raises(GumdropError):
        train_meta(ds, ["forest"], Dataset([], [], ds.schema), {BEGIN_SEG})


# external predictions

def _write(tmp_path, text, name="ext.tsv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_ingest_full_coverage(tmp_path):
    docs = small_docs(2)
    text = OracleModule().predict(docs).to_text()
    col = ingest_external(_write(tmp_path, text), docs)
    assert col.module_id == "ext" and col.keys == token_keys(docs)
    module = ExternalModule("ext", _write(tmp_path, text))
    assert multitrain(module, docs, make_folds(docs, 2, 0)).labels == col.labels


def test_ingest_missing_and_duplicate_rows(tmp_path):
    docs = small_docs(2)
    lines = OracleModule().predict(docs).to_text().splitlines()
    with pytest.raises(CoverageError, match=r"no prediction for token \('doc0', 0, 2\)"):
        ingest_external(_write(tmp_path, "\n".join(lines[:2] + lines[3:])), docs)
    with pytest.raises(CoverageError, match="duplicate"):
        ingest_external(_write(tmp_path, "\n".join(lines + lines[1:2])), docs)


@given(st.lists(st.tuples(st.floats(0.01, 5), st.floats(0.01, 5)), min_size=6, max_size=6))
@settings(max_examples=40, deadline=None)
def test_unnormalized_rows_are_renormalized(pairs):
    docs = small_docs(1, 2)
    rows = ["doc0\t%d\t%d\tx\t%r,%r" % (s, t, a, b)
            for (s, t), (a, b) in zip([(s, t) for s in (0, 1) for t in (1, 2, 3)], pairs)]
    col = read_column("\n".join(rows), docs, "m")
    assert np.allclose(col.values.sum(axis=1), 1.0, atol=1e-9)
    for (a, b), row in zip(pairs, col.values):
        assert row[0] == pytest.approx(a / (a + b))
