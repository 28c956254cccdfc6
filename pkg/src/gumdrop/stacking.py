"""Out-of-fold multitraining and metalearner training.

Each base module is trained k times, each time on all folds but one, and
predicts the held-out fold; the concatenated predictions form that module's
column of the multitraining matrix, which (with token features) is what the
metalearner trains on.
"""

import copy
import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import corpus
from .errors import CoverageError, FoldError, GumdropError
from .features.schema import CATEGORICAL, NUMERIC, feature_kind, window_records
from .learners import Dataset, predict_proba, train
from .learners.data import Encoding

log = logging.getLogger(__name__)

SENT_START, NO_START = "SentStart", "NoStart"


@dataclass
class ModuleColumn:
    """One base module's predictions: a label and a value vector per token."""
    module_id: str
    keys: list
    labels: list
    values: np.ndarray
    components: tuple
    kind: str = "proba"

    def __len__(self):
        return len(self.keys)

    def reorder(self, keys):
        index = {k: i for i, k in enumerate(self.keys)}
        try:
            rows = [index[k] for k in keys]
        except KeyError as e:
            raise CoverageError("module %s has no prediction for token %s"
                                % (self.module_id, e.args[0])) from None
        return ModuleColumn(self.module_id, list(keys), [self.labels[i] for i in rows],
                            self.values[rows], self.components, self.kind)

    def to_text(self):
        lines = ["# module=%s kind=%s components=%s"
                 % (self.module_id, self.kind, ",".join(self.components))]
        for (doc, sent, tok), label, vals in zip(self.keys, self.labels, self.values):
            lines.append("%s\t%d\t%d\t%s\t%s" % (doc, sent, tok, label,
                                                 ",".join(repr(float(v)) for v in vals)))
        return "\n".join(lines) + "\n"


class MultitrainMatrix(dict):
    """module id -> ModuleColumn, all aligned to the same token keys."""


class BaseModule:
    """A trainable base predictor. Subclasses set ``task``, ``kind`` and
    ``components`` and implement ``fit``/``predict``/``state``."""

    id = "base"
    task = "seg"
    kind = "proba"
    components = ()
    external = False

    def __init__(self, **config):
        self.config = config

    def clone(self):
        return type(self)(**copy.deepcopy(self.config))

    def digest(self):
        blob = json.dumps({"cls": type(self).__name__, "config": self.config},
                          sort_keys=True, default=str)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]

    def fit(self, docs):
        raise NotImplementedError

    def predict(self, docs):
        raise NotImplementedError

    def state(self):
        return {}

    def load_state(self, state):
        return self

    def column(self, docs, labels, values):
        keys = [k for d in docs for k in d.keys()]
        return ModuleColumn(self.id, keys, list(labels), np.asarray(values, dtype=float)
                            .reshape(len(keys), len(self.components)), tuple(self.components),
                            self.kind)


@dataclass
class FoldAssignment:
    k: int
    seed: int
    level: str                        # "document" or "sentence"
    folds: dict = field(default_factory=dict)   # doc index or (doc index, offset) -> fold

    def split(self, docs, fold):
        """(training docs, held-out docs) for one fold."""
        train, held = [], []
        for i, doc in enumerate(docs):
            if self.level == "document":
                (held if self.folds[i] == fold else train).append(doc)
                continue
            inside = {s.doc_offset for s in doc.sentences if self.folds[(i, s.doc_offset)] == fold}
            outside = {s.doc_offset for s in doc.sentences} - inside
            for part, bucket in ((corpus.subset(doc, inside), held),
                                 (corpus.subset(doc, outside), train)):
                if part is not None:
                    bucket.append(part)
        return train, held


def make_folds(docs, k=5, seed=0):
    """Round-robin over a seeded shuffle of documents, or of sentences when
    there are fewer than ``k`` documents."""
    if not docs:
        raise ValueError("cannot fold an empty corpus")
    rng = np.random.default_rng(seed)
    if len(docs) >= k:
        units = list(range(len(docs)))
        level = "document"
    else:
        units = [(i, s.doc_offset) for i, d in enumerate(docs) for s in d.sentences]
        level = "sentence"
        if len(units) < k:
            raise ValueError("corpus has only %d sentences for %d folds" % (len(units), k))
    order = rng.permutation(len(units))
    folds = {units[j]: pos % k for pos, j in enumerate(order)}
    return FoldAssignment(k, seed, level, folds)


def token_keys(docs):
    return [k for d in docs for k in d.keys()]


def _check_unique(docs):
    names = [d.name for d in docs]
    if len(set(names)) != len(names):
        raise GumdropError("document names must be unique within a corpus")


def cache_path(cache_dir, docs, module, folds):
    key = "%s-%s-%s-k%d-s%d" % (module.id, module.digest(), corpus.corpus_hash(docs)[:16],
                                folds.k, folds.seed)
    return os.path.join(cache_dir, key + ".tsv")


def multitrain(module, docs, folds, cache_dir=None, audit=None, jobs=1):
    """Out-of-fold predictions of ``module`` for every token of ``docs``."""
    _check_unique(docs)
    keys = token_keys(docs)
    if module.external:
        return module.predict(docs).reorder(keys)
    path = cache_path(cache_dir, docs, module, folds) if cache_dir else None
    if path and os.path.exists(path):
        with open(path, encoding="utf-8") as f:
            return read_column(f.read(), docs, module.id)

    def run(fold):
        train_docs, held = folds.split(docs, fold)
        try:
            fitted = module.clone().fit(train_docs)
            col = fitted.predict(held)
        except Exception as e:  # noqa: BLE001 - reported with the fold id
            raise FoldError(fold, e) from e
        return fold, token_keys(train_docs), token_keys(held), col

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, range(folds.k)))
    else:
        results = [run(f) for f in range(folds.k)]

    parts_keys, parts_labels, parts_values = [], [], []
    for fold, train_keys, held_keys, col in results:
        if audit is not None:
            audit.append({"fold": fold, "train": frozenset(train_keys),
                          "predict": frozenset(held_keys)})
        parts_keys += col.keys
        parts_labels += col.labels
        parts_values.append(col.values)
    merged = ModuleColumn(module.id, parts_keys, parts_labels,
                          np.vstack(parts_values) if parts_values else
                          np.zeros((0, len(module.components))),
                          tuple(module.components), module.kind)
    merged = merged.reorder(keys)
    if path:
        os.makedirs(cache_dir, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(merged.to_text())
    return merged


def read_column(text, docs, module_id=None, renormalize=True):
    """Parse ``doc<TAB>sent<TAB>tok<TAB>label<TAB>p1,p2,...`` rows into a
    column aligned to ``docs``; rows for tokens outside ``docs`` are ignored."""
    kind, components = "proba", None
    rows = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            for part in line[1:].split():
                if "=" in part:
                    k, v = part.split("=", 1)
                    if k == "kind":
                        kind = v
                    elif k == "components":
                        components = tuple(v.split(",")) if v else ()
                    elif k == "module" and module_id is None:
                        module_id = v
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise CoverageError("line %d: expected 5 tab-separated fields" % lineno)
        key = (parts[0], int(parts[1]), int(parts[2]))
        if key in rows:
            raise CoverageError("duplicate prediction for token %s (line %d)" % (key, lineno))
        vals = [float(v) for v in parts[4].split(",")] if parts[4] else []
        rows[key] = (parts[3], vals)
    keys = token_keys(docs)
    missing = [k for k in keys if k not in rows]
    if missing:
        raise CoverageError("no prediction for token %s (%d missing)" % (missing[0], len(missing)))
    labels = [rows[k][0] for k in keys]
    width = {len(rows[k][1]) for k in keys}
    if len(width) > 1:
        raise CoverageError("inconsistent number of values per token")
    values = np.array([rows[k][1] for k in keys], dtype=float).reshape(len(keys), -1)
    if components is None:
        components = tuple("p%d" % j for j in range(values.shape[1]))
    if kind == "proba" and renormalize and len(keys):
        sums = values.sum(axis=1)
        bad = np.abs(sums - 1.0) > 1e-6
        if bad.any():
            log.warning("%s: %d probability rows do not sum to 1; renormalized",
                        module_id, int(bad.sum()))
            safe = np.where(sums > 0, sums, 1.0)
            values[bad] = values[bad] / safe[bad, None]
    return ModuleColumn(module_id or "external", keys, labels, values, components, kind)


def ingest_external(pred_file, docs, module_id=None):
    with open(pred_file, encoding="utf-8") as f:
        text = f.read()
    if module_id is None:
        module_id = os.path.splitext(os.path.basename(pred_file))[0]
    return read_column(text, docs, module_id)


class ExternalModule(BaseModule):
    """Predictions produced outside the toolkit, read from a file.

    The file for the training corpus must hold out-of-fold predictions; at
    prediction time the same module id is bound to a file covering the test
    corpus.
    """

    external = True

    def __init__(self, module_id, path=None, components=None, kind="proba"):
        super().__init__(module_id=module_id, components=components, kind=kind)
        self.id = module_id
        self.path = path
        self.components = tuple(components or ())
        self.kind = kind

    def clone(self):
        return self

    def fit(self, docs):
        return self

    def bind(self, path):
        self.path = path
        return self

    def predict(self, docs):
        if self.path is None:
            raise CoverageError("external module %s needs a prediction file" % self.id)
        col = ingest_external(self.path, docs, self.id)
        if self.components and tuple(col.components) != self.components \
                and len(col.components) == len(self.components):
            col.components = self.components
        if not self.components:
            self.components = tuple(col.components)
            self.kind = col.kind
        elif len(col.components) != len(self.components):
            raise CoverageError("external module %s: expected %d values per token, got %d"
                                % (self.id, len(self.components), len(col.components)))
        return col

    def state(self):
        return {"components": list(self.components), "kind": self.kind}

    def load_state(self, state):
        self.components = tuple(state["components"])
        self.kind = state["kind"]
        return self


def gold_task_labels(docs, task):
    if task == "sent":
        return [SENT_START if t.sent_initial else NO_START for d in docs for t in d.tokens]
    if task == "seg":
        return [t.seg_label for d in docs for t in d.tokens]
    return [t.conn_label for d in docs for t in d.tokens]


def meta_records(matrix, docs, doc_feats, meta_features, window=3):
    """Per-token dicts: each module's values and label, plus windowed token features."""
    keys = token_keys(docs)
    cols = []
    for mid, col in matrix.items():
        if len(col) != len(keys) or col.keys != keys:
            col = col.reorder(keys)
        cols.append(col)
    records = []
    for feats in doc_feats:
        records.extend(window_records(feats, window, meta_features))
    if len(records) != len(keys):
        raise GumdropError("token features do not cover the corpus")
    for col in cols:
        names = ["%s:%s" % (col.module_id, c) for c in col.components]
        label_name = "%s:label" % col.module_id
        for rec, lab, vals in zip(records, col.labels, col.values):
            for name, v in zip(names, vals):
                rec[name] = float(v)
            rec[label_name] = str(lab)
    return records


def meta_kinds(matrix, records):
    kinds = {}
    for name in records[0] if records else ():
        if ":" in name:
            kinds[name] = CATEGORICAL if name.endswith(":label") else NUMERIC
        else:
            kinds[name] = feature_kind(name)
    return kinds


def assemble_meta(matrix, docs, doc_feats, meta_features, window=3, task="seg",
                  schema=None, required=None):
    """Metalearner dataset: module outputs plus token features in a window.

    ``doc_feats`` holds the per-token feature dicts of each document.
    ``required`` lists module ids that must be present in ``matrix``.
    """
    for mid in required or ():
        if mid not in matrix:
            raise GumdropError("missing module column %r" % mid)
    records = meta_records(matrix, docs, doc_feats, meta_features, window)
    labels = gold_task_labels(docs, task)
    if schema is None:
        return Dataset.build(records, labels, kinds=meta_kinds(matrix, records))
    return Dataset(records, labels, schema)


def label_f1(gold, pred, positive):
    tp = sum(1 for g, p in zip(gold, pred) if p in positive and p == g)
    npred = sum(1 for p in pred if p in positive)
    ngold = sum(1 for g in gold if g in positive)
    if tp == 0:
        return 0.0
    prec, rec = tp / npred, tp / ngold
    return 2 * prec * rec / (prec + rec)


def train_meta(ds, candidates, dev, positive, params=None, seed=0, jobs=1):
    """Train each candidate on ``ds``, keep the best F on ``dev`` (earlier
    candidates win ties)."""
    if dev is None or len(dev) == 0:
        raise GumdropError("metalearner selection needs a nonempty dev set")
    params = params or {}

    def run(kind):
        try:
            model = train(ds, kind, params.get(kind, {}), seed=seed)
            proba = predict_proba(model, dev)
            pred = [model.classes[i] for i in np.argmax(proba, axis=1)]
            return kind, model, label_f1(dev.labels, pred, positive)
        except Exception as e:  # noqa: BLE001 - a failing candidate is skipped
            log.warning("metalearner candidate %s failed: %s", kind, e)
            return kind, None, None

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, candidates))
    else:
        results = [run(kind) for kind in candidates]
    best = None
    for kind, model, f in results:
        if model is None:
            continue
        if best is None or f > best[2]:
            best = (kind, model, f)
    if best is None:
        raise GumdropError("every metalearner candidate failed")
    best[1].info["dev_f"] = best[2]
    best[1].info["dev_scores"] = {k: f for k, _, f in results if f is not None}
    return best[1]


def encoding_width(schema):
    return Encoding(schema).width
