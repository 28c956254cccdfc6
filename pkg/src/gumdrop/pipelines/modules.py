"""Base modules feeding the three ensembles.

Sentence splitting: window MLP, logistic regression over a character-level
5-gram window, initial-token lexicon, punctuation rule. Segmentation:
subtree gradient boosting, per-sentence bag-of-words segment counter.
Connectives: the frequency table. Each module produces a ModuleColumn of
per-token labels and values for whichever documents it is asked about.
"""

import numpy as np

from .. import corpus
from ..corpus import B_CONN, BEGIN_SEG, I_CONN, NO_SEG, OUT
from ..errors import MissingSyntaxError
from ..features.extract import TokenFeaturizer
from ..features.schema import CHILDREN_FEATURES, feature_kind, window_records
from ..features.selection import filter_redundant
from ..features.syntax import CLAUSAL_RELATIONS
from ..learners import Dataset, TrainedModel, predict_linear, predict_proba, train, train_linear
from ..lexicons import (ConnectiveTable, InitialTokenLexicon, build_connective_table,
                        build_initial_lexicon, freq_conn_predict, punct_split)
from ..stacking import NO_START, SENT_START, BaseModule

SENT_CLASSES = (NO_START, SENT_START)
SEG_CLASSES = (BEGIN_SEG, NO_SEG)
CONN_CLASSES = (B_CONN, I_CONN, OUT)


def make_featurizer(config):
    return TokenFeaturizer(language=config.get("language") or None,
                           pos_source=config.get("pos_source", "auto"),
                           clausal_relations=config.get("clausal_relations") or CLAUSAL_RELATIONS)


def flat_docs(docs):
    return [corpus.flatten(d) for d in docs]


def sent_labels(docs):
    return [SENT_START if t.sent_initial else NO_START for d in docs for t in d.tokens]


def require_syntax(docs):
    for d in docs:
        for s in d.sentences:
            if not s.has_syntax:
                raise MissingSyntaxError(
                    "document %s has no dependency tree for sentence %d; split and parse the "
                    "input first (sentencer, then an external parser)" % (d.name, s.doc_offset))


def class_proba(model, data, classes):
    """Probabilities over a fixed class order, whatever classes the model saw."""
    p = predict_proba(model, data)
    out = np.zeros((p.shape[0], len(classes)))
    for j, c in enumerate(model.classes):
        out[:, classes.index(c)] = p[:, j]
    return out


def kinds_for(names):
    return {n: feature_kind(n) for n in names}


class FeaturizedModule(BaseModule):
    """A module holding its own fitted featurizer and learner."""

    def __init__(self, **config):
        super().__init__(**config)
        self.featurizer = None
        self.model = None

    def state(self):
        return {"featurizer": self.featurizer.state(), "model": self.model.state()}

    def load_state(self, state):
        self.featurizer = TokenFeaturizer.from_state(state["featurizer"])
        self.model = TrainedModel.from_state(state["model"])
        return self


class WindowSentencer(FeaturizedModule):
    """Token window classifier over flat text (logistic regression or MLP)."""

    task = "sent"
    components = SENT_CLASSES

    def __init__(self, module_id="lr", learner="logistic", window=5, features=(),
                 params=None, seed=0, language="", pos_source="auto"):
        super().__init__(module_id=module_id, learner=learner, window=window,
                         features=list(features), params=dict(params or {}), seed=seed,
                         language=language, pos_source=pos_source)
        self.id = module_id

    def _records(self, docs):
        c = self.config
        records = []
        for d in flat_docs(docs):
            feats = self.featurizer.doc_features(d, syntax=False)
            records.extend(window_records(feats, c["window"], c["features"]))
        return records

    def fit(self, docs):
        c = self.config
        self.featurizer = make_featurizer(c).fit(flat_docs(docs))
        records = self._records(docs)
        ds = Dataset.build(records, sent_labels(docs), kinds=kinds_for(records[0]))
        self.model = train(ds, c["learner"], c["params"], seed=c["seed"])
        return self

    def predict(self, docs):
        records = self._records(docs)
        proba = class_proba(self.model, records, SENT_CLASSES) if records else \
            np.zeros((0, 2))
        labels = [SENT_CLASSES[i] for i in np.argmax(proba, axis=1)]
        return self.column(docs, labels, proba)


class WikiSentencer(BaseModule):
    """Initial-token lexicon: a lexicon form opens a sentence.

    With no lexicon file configured, the lexicon is rebuilt from the
    training sentences, each treated as a paragraph.
    """

    id = "wiki"
    task = "sent"
    components = ("ratio",)
    kind = "score"

    def __init__(self, lexicon="", min_freq=10, min_ratio=0.5):
        super().__init__(lexicon=lexicon, min_freq=min_freq, min_ratio=min_ratio)
        self.lexicon = None

    def fit(self, docs):
        c = self.config
        if c["lexicon"]:
            with open(c["lexicon"], encoding="utf-8") as f:
                self.lexicon = InitialTokenLexicon.from_text(f.read())
        else:
            paragraphs = [" ".join(t.form for t in s.tokens) for d in docs for s in d.sentences]
            self.lexicon = build_initial_lexicon(paragraphs, c["min_freq"], c["min_ratio"])
        return self

    def predict(self, docs):
        ratios = [self.lexicon.ratio(t.form) for d in docs for t in d.tokens]
        labels = [SENT_START if r > 0 else NO_START for r in ratios]
        return self.column(docs, labels, ratios)

    def state(self):
        return {"lexicon": self.lexicon.to_text()}

    def load_state(self, state):
        self.lexicon = InitialTokenLexicon.from_text(state["lexicon"])
        return self


class PunctSentencer(BaseModule):
    """Split after sentence-final punctuation."""

    id = "punct"
    task = "sent"
    components = ("start",)
    kind = "score"

    def fit(self, docs):
        return self

    def predict(self, docs):
        flags = [f for d in docs for f in punct_split(d.tokens)]
        return self.column(docs, [SENT_START if f else NO_START for f in flags],
                           [float(f) for f in flags])


class SubtreeSegmenter(FeaturizedModule):
    """Gradient boosting over a token trigram window plus the node's
    dependency-subtree context, after redundant-feature filtering."""

    id = "subtree"
    task = "seg"
    components = SEG_CLASSES

    def __init__(self, window=3, features=(), params=None, filter=True, seed=0,
                 language="", pos_source="auto", clausal_relations=()):
        super().__init__(window=window, features=list(features), params=dict(params or {}),
                         filter=filter, seed=seed, language=language, pos_source=pos_source,
                         clausal_relations=sorted(clausal_relations))

    def _records(self, docs):
        c = self.config
        require_syntax(docs)
        records = []
        children = sorted(CHILDREN_FEATURES)
        for d in docs:
            feats = self.featurizer.doc_features(d, syntax=True, children=True)
            for rec, f in zip(window_records(feats, c["window"], c["features"]), feats):
                rec.update((name, f[name]) for name in children)
                records.append(rec)
        return records

    def fit(self, docs):
        c = self.config
        self.featurizer = make_featurizer(c).fit(docs)
        records = self._records(docs)
        labels = [t.seg_label for d in docs for t in d.tokens]
        ds = Dataset.build(records, labels, kinds=kinds_for(records[0]))
        if c["filter"]:
            ds = ds.with_schema(filter_redundant(records, ds.schema))
        params = dict(c["params"])
        self.model = train(ds, "gbt", params, seed=c["seed"])
        return self

    def predict(self, docs):
        names = set(self.model.schema.names)
        records = [{k: v for k, v in r.items() if k in names} for r in self._records(docs)]
        proba = class_proba(self.model, records, SEG_CLASSES) if records else np.zeros((0, 2))
        labels = [SEG_CLASSES[i] for i in np.argmax(proba, axis=1)]
        return self.column(docs, labels, proba)


class BOWCounter(FeaturizedModule):
    """Ridge regression from a sentence's bag of words (top forms, else POS)
    to its number of segment starts; the estimate is copied to every token
    of the sentence."""

    id = "bow"
    task = "seg"
    components = ("count",)
    kind = "score"

    def __init__(self, size=200, reg_grid=(0.1, 1.0, 10.0), seed=0, language="",
                 pos_source="auto"):
        super().__init__(size=size, reg_grid=list(reg_grid), seed=seed, language=language,
                         pos_source=pos_source)

    def _bags(self, docs):
        bags = []
        for d in docs:
            feats = self.featurizer.doc_features(d, syntax=False)
            k = 0
            for s in d.sentences:
                bag = {}
                for f in feats[k:k + len(s)]:
                    for term in {"w:" + f["wordlex"], "p:" + f["upos"]}:
                        bag[term] = bag.get(term, 0) + 1
                k += len(s)
                bags.append(bag)
        return bags

    def _matrix(self, bags):
        vocab = self.model.info["vocab"]
        index = {t: i for i, t in enumerate(vocab)}
        X = np.zeros((len(bags), len(vocab)))
        for r, bag in enumerate(bags):
            for t, n in bag.items():
                j = index.get(t)
                if j is not None:
                    X[r, j] = n
        return X

    def fit(self, docs):
        c = self.config
        self.featurizer = make_featurizer(c)
        self.featurizer.wordlex_size = c["size"]
        self.featurizer.fit(docs)
        bags = self._bags(docs)
        vocab = sorted({t for b in bags for t in b})
        records = [{t: float(b.get(t, 0)) for t in vocab} for b in bags]
        counts = [float(sum(t.seg_label == BEGIN_SEG for t in s.tokens))
                  for d in docs for s in d.sentences]
        from ..features.schema import NUMERIC
        ds = Dataset.build(records, counts, kinds={t: NUMERIC for t in vocab})
        self.model = train_linear(ds, "ridge", c["reg_grid"], seed=c["seed"])
        self.model.info["vocab"] = vocab
        return self

    def predict(self, docs):
        bags = self._bags(docs)
        preds = predict_linear(self.model, self._matrix(bags)) if bags else np.zeros(0)
        values, labels = [], []
        k = 0
        for d in docs:
            for s in d.sentences:
                v = float(preds[k])
                k += 1
                values.extend([v] * len(s))
                labels.extend([str(max(0, int(round(v))))] * len(s))
        return self.column(docs, labels, values)


class FreqConnective(BaseModule):
    """Connective table lookup: the ratio and training frequency of the
    longest attested sequence covering each token, and its span position."""

    id = "freq"
    task = "conn"
    components = ("ratio", "freq", "span_b", "span_i")
    kind = "score"

    def __init__(self, threshold=0.5):
        super().__init__(threshold=threshold)
        self.table = None

    def fit(self, docs):
        self.table = build_connective_table(docs)
        return self

    def predict(self, docs):
        values, labels = [], []
        for d in docs:
            for ratio, freq, pos in freq_conn_predict(d, self.table):
                values.append((ratio, float(freq), float(pos == "B"), float(pos == "I")))
                if ratio >= self.config["threshold"] and pos != "O":
                    labels.append(B_CONN if pos == "B" else I_CONN)
                else:
                    labels.append(OUT)
        return self.column(docs, labels, values)

    def state(self):
        return {"table": self.table.to_text()}

    def load_state(self, state):
        self.table = ConnectiveTable.from_text(state["table"])
        return self


REGISTRY = {
    "WindowSentencer": WindowSentencer,
    "WikiSentencer": WikiSentencer,
    "PunctSentencer": PunctSentencer,
    "SubtreeSegmenter": SubtreeSegmenter,
    "BOWCounter": BOWCounter,
    "FreqConnective": FreqConnective,
}


def build_modules(cfg, mlp_window=None):
    """Unfitted base modules enabled by a PipelineConfig."""
    common = {"language": cfg.language, "pos_source": cfg.pos_source}
    out = []
    for name in cfg.modules:
        if name == "punct":
            out.append(PunctSentencer())
        elif name == "wiki":
            w = cfg.learner("wiki")
            out.append(WikiSentencer(w["lexicon"], w["min_freq"], w["min_ratio"]))
        elif name == "lr":
            p = cfg.learner("lr")
            out.append(WindowSentencer("lr", "logistic", p["window"], p["features"],
                                       {"reg_grid": p["reg_grid"]}, cfg.seed, **common))
        elif name == "mlp":
            p = cfg.learner("mlp")
            params = {k: v for k, v in p.items() if k not in ("windows", "features")}
            window = mlp_window or p["windows"][0]
            params["window"] = window
            out.append(WindowSentencer("mlp", "mlp", window, p["features"], params, cfg.seed,
                                       **common))
        elif name == "subtree":
            p = cfg.learner("subtree")
            params = {k: v for k, v in p.items() if k not in ("window", "features", "filter")}
            out.append(SubtreeSegmenter(p["window"], p["features"], params, p["filter"],
                                        cfg.seed, clausal_relations=cfg.clausal_relations,
                                        **common))
        elif name == "bow":
            p = cfg.learner("bow")
            out.append(BOWCounter(p["size"], p["reg_grid"], cfg.seed, **common))
        elif name == "freq":
            out.append(FreqConnective())
    return out
