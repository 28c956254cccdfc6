"""Acceptance criteria 1-8, one test each.

Every test prints a line ``ACCEPTANCE <n> PASS|FAIL <detail>`` and fails
when its criterion (including the time budget) is not met. Criterion 8 runs
only when ``GUMDROP_REAL_DATA`` names a directory holding one
``*train*.conllu``, ``*dev*.conllu`` and ``*test*.conllu`` file each;
otherwise it is skipped, and a failed ordering is reported as xfail.
"""

import glob
import os
import time
from collections import Counter
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from gumdrop import cli, corpus, synthetic
from gumdrop.corpus import B_CONN, BEGIN_SEG, I_CONN
from gumdrop.eval import Score, report, score_boundaries, score_connectives
from gumdrop.features import dep_brackets, subtree_features, theils_u
from gumdrop.learners import (Dataset, logistic_loss_grad, mlp_loss_and_grad, predict_proba,
                              train, train_linear)
from gumdrop.learners.mlp import init_params
from gumdrop.lexicons import build_connective_table, conn_spans, exact_ratio, exclusive_conn_baseline
from gumdrop.pipelines import (PipelineConfig, baseline_segment_by_sentence, predict_connectives,
                               predict_segments, repair_conn_labels, train_connective,
                               train_segmenter)
from gumdrop.pipelines.modules import BOWCounter, SubtreeSegmenter
from gumdrop.stacking import label_f1, make_folds, multitrain, read_column, token_keys

from conftest import FAST_LEARNERS, NESTED_ADVCL, make_sentence


@pytest.fixture
def verdict(capsys):
    """``verdict(n, ok, detail)`` prints the criterion line, then asserts."""
    def emit(n, ok, detail):
        with capsys.disabled():
            print("\nACCEPTANCE %d %s %s" % (n, "PASS" if ok else "FAIL", detail))
        assert ok, "criterion %d: %s" % (n, detail)
    return emit


@contextmanager
def stopwatch():
    box = {}
    start = time.perf_counter()
    yield box
    box["s"] = time.perf_counter() - start


def cfg(task):
    return PipelineConfig(task=task, learners=FAST_LEARNERS)


# 1 -------------------------------------------------------------------------

def test_1_nested_clause_fragment(verdict):
    with stopwatch() as t:
        s = make_sentence(NESTED_ADVCL)
        tags = dep_brackets(s)
        f = subtree_features(s, 5)
    ok_tags = tags == ["O", "B-advcl", "I-advcl", "B-advcl", "I-advcl", "I-advcl", "E-advcl",
                       "I-advcl", "E-advcl"]
    got = (f["lspan"], f["rspan"], f["lchild_close"], f["lchild_far"], f["rchild_close"],
           f["rchild_far"])
    ok_sub = got == (1, 2, "mark", "mark", "det", "obj")
    verdict(1, ok_tags and ok_sub and t["s"] < 1.0,
            "brackets=%s subtree(given)=%s %.3fs/1s" % (" ".join(tags), got, t["s"]))


# 2 -------------------------------------------------------------------------

def _fd_check(loss, params, grads, h=1e-4):
    worst = 0.0
    for k, P in params.items():
        for idx in np.ndindex(P.shape):
            old = P[idx]
            P[idx] = old + h
            up = loss()
            P[idx] = old - h
            down = loss()
            P[idx] = old
            fd = (up - down) / (2 * h)
            worst = max(worst, abs(fd - grads[k][idx]) / max(1.0, abs(fd)))
    return worst


def _entropy(values):
    n = len(values)
    return -sum(c / n * np.log(c / n) for c in Counter(values).values())


def _brute_u(x, y):
    hy = _entropy(y)
    hyx = sum(c / len(x) * _entropy([b for a, b in zip(x, y) if a == v])
              for v, c in Counter(x).items())
    return 1.0 if hy == 0 else (hy - hyx) / hy


def test_2_learner_oracles(verdict):
    rng = np.random.default_rng(0)
    with stopwatch() as t:
        X, y = rng.normal(size=(10, 3)), rng.normal(size=10)
        recs = [{"x%d" % j: float(v) for j, v in enumerate(r)} for r in X]
        ridge = train_linear(Dataset.build(recs, list(y)), "ridge", [0.1])
        Xc, yc = X - X.mean(0), y - y.mean()
        closed = np.linalg.solve(Xc.T @ Xc + 0.1 * np.eye(3), Xc.T @ yc)
        ridge_err = float(np.max(np.abs(ridge.params["w"] - closed)))

        W, b = rng.normal(size=(3, 2)), rng.normal(size=2)
        Y = np.eye(2)[rng.integers(0, 2, 10)]
        _, gW, gb = logistic_loss_grad(W, b, X, Y, 0.1)
        lr_params = {"W": W, "b": b}
        lr_err = _fd_check(lambda: logistic_loss_grad(lr_params["W"], lr_params["b"], X, Y,
                                                      0.1)[0], lr_params, {"W": gW, "b": gb})

        from gumdrop.features import CATEGORICAL, NUMERIC, FeatureSchema, FeatureSpec
        schema = FeatureSchema((FeatureSpec("w@0", CATEGORICAL, ("a", "b", "c")),
                                FeatureSpec("n@0", NUMERIC)))
        mp = init_params(schema, 3, 4, (6,), rng)
        codes, num, yy = rng.integers(0, 4, (10, 1)), rng.normal(size=(10, 1)), \
            rng.integers(0, 3, 10)
        _, mg = mlp_loss_and_grad(mp, codes, num, yy)
        mlp_err = _fd_check(lambda: mlp_loss_and_grad(mp, codes, num, yy)[0], mp, mg)

        u_err = 0.0
        for _ in range(50):
            xs = list(rng.choice(list("abc"), 30))
            ys = list(rng.choice(list("pqrs"), 30))
            u_err = max(u_err, abs(theils_u(xs, ys) - _brute_u(xs, ys)))

        cls_X = rng.normal(size=(60, 2))
        cls_y = ["p" if a * b > 0 else "q" if a > 0 else "r" for a, b in cls_X]
        ds = Dataset.build([{"a": float(a), "b": float(b)} for a, b in cls_X], cls_y)
        sum_err = 0.0
        for kind, params in (("logistic", {"reg_grid": (0.1,)}), ("forest", {"n_trees": 10}),
                             ("extratrees", {"n_trees": 10}), ("gbt", {"n_trees": 10}),
                             ("mlp", {"epochs": 3})):
            P = predict_proba(train(ds, kind, params), ds)
            sum_err = max(sum_err, float(np.max(np.abs(P.sum(axis=1) - 1.0))))
    ok = ridge_err <= 1e-8 and lr_err <= 1e-4 and mlp_err <= 1e-4 and u_err <= 1e-10 \
        and sum_err <= 1e-9 and t["s"] < 30
    verdict(2, ok, "ridge=%.1e logistic_fd=%.1e mlp_fd=%.1e theils_u=%.1e proba_sum=%.1e "
            "%.2fs/30s" % (ridge_err, lr_err, mlp_err, u_err, sum_err, t["s"]))


# 3 -------------------------------------------------------------------------

def test_3_stacking_protocol(verdict, tmp_path):
    docs = synthetic.segmentation_corpus(60, seed=3)
    with stopwatch() as t:
        folds = make_folds(docs, 5, seed=0)
        held = sorted(k for f in range(5) for k in token_keys(folds.split(docs, f)[1]))
        partition = held == sorted(token_keys(docs))
        audit = []
        modules = [SubtreeSegmenter(params={"n_trees": 10, "max_depth": 3}),
                   BOWCounter(reg_grid=(1.0,))]
        overlap = 0
        identical = True
        for m in modules:
            col = multitrain(m, docs, folds, cache_dir=str(tmp_path), audit=audit)
            path = next(p for p in tmp_path.iterdir() if p.name.startswith(m.id + "-"))
            stored = path.read_bytes()
            again = multitrain(m, docs, folds, cache_dir=str(tmp_path))
            reread = read_column(stored.decode("utf-8"), docs, m.id)
            identical &= again.to_text().encode("utf-8") == stored == col.to_text().encode()
            identical &= np.array_equal(reread.values, col.values) and reread.labels == col.labels
        overlap = sum(len(a["train"] & a["predict"]) for a in audit)
    ok = partition and overlap == 0 and len(audit) == 10 and identical and t["s"] < 60
    verdict(3, ok, "docs=%d partition=%s leaked_tokens=%d cache_identical=%s %.1fs/60s"
            % (len(docs), partition, overlap, identical, t["s"]))


# 4 -------------------------------------------------------------------------

def _seg_scores(model, test):
    pred = predict_segments(model, test)
    ours = score_boundaries(test, pred, "seg").f1
    gold = [t.seg_label for d in test for t in d.tokens]
    bases = {m.id: label_f1(gold, m.predict(test).labels, {BEGIN_SEG}) for m in model.modules}
    base = score_boundaries(test, baseline_segment_by_sentence(test), "seg").f1
    return ours, bases, base


def test_4_synthetic_segmentation(verdict):
    with stopwatch() as t:
        train, dev, test = synthetic.split(synthetic.segmentation_corpus(60, seed=4))
        model = train_segmenter(train, dev, cfg("seg"))
        ours, bases, _ = _seg_scores(model, test)

        variant = synthetic.segmentation_corpus(60, seed=44, clause_rate=0.86)
        starts = [t for d in variant for t in d.tokens if t.seg_label == BEGIN_SEG]
        internal = sum(not t.sent_initial for t in starts) / len(starts)
        vtrain, vdev, vtest = synthetic.split(variant)
        vours, _, vbase = _seg_scores(train_segmenter(vtrain, vdev, cfg("seg")), vtest)
    ok = ours >= 0.95 and ours >= max(bases.values()) - 0.02 and vbase < vours \
        and 0.27 <= internal <= 0.33 and t["s"] < 300
    verdict(4, ok, "ensemble_F=%.3f bases=%s | variant internal=%.0f%% ensemble_F=%.3f "
            "sentence_baseline_F=%.3f %.1fs/300s"
            % (ours, {k: round(v, 3) for k, v in bases.items()}, 100 * internal, vours, vbase,
               t["s"]))


# 5 -------------------------------------------------------------------------

def _recount(docs, seq):
    labeled = total = 0
    for d in docs:
        forms = [t.form for t in d.tokens]
        spans = set(conn_spans([t.conn_label for t in d.tokens]))
        for i in range(len(forms) - len(seq) + 1):
            if tuple(forms[i:i + len(seq)]) == seq:
                total += 1
                labeled += (i, i + len(seq)) in spans
    return Fraction(labeled, total)


def test_5_connectives(verdict):
    with stopwatch() as t:
        docs = synthetic.connective_corpus(60, seed=5)
        train, dev, test = synthetic.split(docs)
        table = build_connective_table(train)
        ratios_exact = all(exact_ratio(table, seq) == _recount(train, seq)
                           for seq in table.entries)

        gold = [t.conn_label for d in train for t in d.tokens]
        pred = [lab for d in train for lab in exclusive_conn_baseline(train, d)]
        hits = sum(p == B_CONN and g in (B_CONN, I_CONN) for g, p in zip(gold, pred))
        npred = sum(p == B_CONN for p in pred)
        baseline_p = hits / npred if npred else 0.0

        model = train_connective(train, dev, cfg("conn"))
        ours = score_connectives(test, predict_connectives(model, test)).f1
        col = model.modules[0].predict(test)
        k, by_table = 0, []
        for d in test:
            by_table.append(corpus.relabel(d, "conn", repair_conn_labels(col.labels[k:k + len(d)])))
            k += len(d)
        freq = score_connectives(test, by_table).f1
    ok = ratios_exact and baseline_p == 1.0 and ours >= freq and t["s"] < 120
    verdict(5, ok, "table_entries=%d ratios_exact=%s baseline_P=%.3f (%d predicted) "
            "ensemble_F=%.3f freq_F=%.3f %.1fs/120s"
            % (len(table.entries), ratios_exact, baseline_p, npred, ours, freq, t["s"]))


# 6 -------------------------------------------------------------------------

def test_6_scorer(verdict):
    with stopwatch() as t:
        doc = synthetic.segmentation_corpus(1, seed=0)[0]
        n = len(doc)
        gold = corpus.relabel(doc, "seg", [BEGIN_SEG if i in (0, 3, 6, 9, 12) else "NoSeg"
                                           for i in range(n)])
        pred = corpus.relabel(doc, "seg", [BEGIN_SEG if i in (0, 3, 6, 9, 1, 2) else "NoSeg"
                                           for i in range(n)])
        s = score_boundaries([gold], [pred], "seg")
        prf = tuple(round(v, 3) for v in (s.precision, s.recall, s.f1))
        lines = report([("a", Score(8, 2, 2)), ("b", Score(9, 1, 1))]).splitlines()
        mean = next(l for l in lines if l.startswith("mean ")).split()[1:]
        std = next(l for l in lines if l.startswith("std ")).split()[1:]
    ok = prf == (0.667, 0.8, 0.727) and mean[2] == "0.850" and std[2] == "0.050" and t["s"] < 1
    verdict(6, ok, "P/R/F=%s mean_F=%s std_F=%s %.3fs/1s" % (prf, mean[2], std[2], t["s"]))


# 7 -------------------------------------------------------------------------

def test_7_determinism(verdict, tmp_path):
    train, dev, test = synthetic.split(synthetic.segmentation_corpus(25, seed=7))
    paths = {}
    for name, docs in (("train", train), ("dev", dev), ("test", test)):
        p = tmp_path / ("%s.conllu" % name)
        p.write_text(corpus.write_conllu(docs), encoding="utf-8")
        paths[name] = str(p)
    conf = tmp_path / "seg.ini"
    conf.write_text(cfg("seg").to_text(), encoding="utf-8")
    outputs = []
    with stopwatch() as t:
        for run, jobs in (("a", "1"), ("b", "4")):
            model, out = str(tmp_path / (run + ".model")), str(tmp_path / (run + ".conllu"))
            assert cli.main(["train", paths["train"], paths["dev"], "-o", model, "--task", "seg",
                             "--config", str(conf), "--seed", "13", "--jobs", jobs]) == 0
            assert cli.main(["predict", model, paths["test"], "-o", out, "--task", "seg"]) == 0
            with open(model, "rb") as fm, open(out, "rb") as fo:
                outputs.append((fm.read(), fo.read()))
    same_model = outputs[0][0] == outputs[1][0]
    same_pred = outputs[0][1] == outputs[1][1]
    verdict(7, same_model and same_pred and t["s"] < 300,
            "model_identical=%s predictions_identical=%s (jobs 1 vs 4) %.1fs/300s"
            % (same_model, same_pred, t["s"]))


# 8 -------------------------------------------------------------------------

def test_8_real_data_protocol(verdict, tmp_path, capsys):
    root = os.environ.get("GUMDROP_REAL_DATA")
    if not root:
        with capsys.disabled():
            print("\nACCEPTANCE 8 SKIP set GUMDROP_REAL_DATA to a directory with "
                  "train/dev/test .conllu files (not gating)")
        pytest.skip("no real corpus supplied (GUMDROP_REAL_DATA unset)")

    def one(pattern):
        found = sorted(glob.glob(os.path.join(root, pattern)))
        if len(found) != 1:
            pytest.skip("expected one %s file in %s, found %d" % (pattern, root, len(found)))
        return found[0]

    train, dev, test = one("*train*.conllu"), one("*dev*.conllu"), one("*test*.conllu")
    model, out = str(tmp_path / "real.model"), str(tmp_path / "pred.conllu")
    with stopwatch() as t:
        assert cli.main(["train", train, dev, "-o", model, "--task", "seg"]) == 0
        assert cli.main(["predict", model, test, "-o", out, "--task", "seg"]) == 0
        assert cli.main(["score", test, out, "--task", "seg"]) == 0
    gold = corpus.read_corpus(test)
    ours = score_boundaries(gold, corpus.read_corpus(out), "seg").f1
    base = score_boundaries(gold, baseline_segment_by_sentence(gold), "seg").f1
    line = "ensemble_F=%.3f sentence_baseline_F=%.3f %.0fs (%s)" % (ours, base, t["s"], test)
    if ours < base:
        with capsys.disabled():
            print("\nACCEPTANCE 8 FAIL " + line + " (not gating)")
        pytest.xfail("ensemble below the sentence baseline on the supplied corpus")
    verdict(8, True, line)
