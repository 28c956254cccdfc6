"""End-to-end training and prediction for the three stacked ensembles."""

import logging

import numpy as np

from .. import corpus, serialize
from ..corpus import B_CONN, BEGIN_SEG, I_CONN, NO_SEG, OUT
from ..errors import ConfigError, CoverageError, GumdropError
from ..features.extract import TokenFeaturizer
from ..features.selection import filter_redundant
from ..learners import TrainedModel, predict_proba
from ..stacking import (SENT_START, ExternalModule, MultitrainMatrix, assemble_meta,
                        label_f1, make_folds, multitrain, train_meta)
from .config import PipelineConfig
from .modules import (REGISTRY, build_modules, flat_docs, make_featurizer,
                      require_syntax, sent_labels)

log = logging.getLogger(__name__)

POSITIVE = {"sent": {SENT_START}, "seg": {BEGIN_SEG}, "conn": {B_CONN, I_CONN}}
MODEL_KIND = "ensemble"


class EnsembleModel:
    """Fitted base modules, the metalearner and the featurizer for its token
    features. Immutable after training."""

    def __init__(self, task, config, featurizer, modules, meta):
        self.task = task
        self.config = config
        self.featurizer = featurizer
        self.modules = modules
        self.meta = meta

    @property
    def fingerprint(self):
        return self.meta.fingerprint

    @property
    def external_ids(self):
        return [m.id for m in self.modules if m.external]

    def _feature_docs(self, docs):
        return flat_docs(docs) if self.task == "sent" else docs

    def token_features(self, docs):
        syntax = self.task != "sent"
        return [self.featurizer.doc_features(d, syntax=syntax) for d in self._feature_docs(docs)]

    def module_matrix(self, docs, external=None):
        external = external or {}
        matrix = MultitrainMatrix()
        for m in self.modules:
            if m.external:
                if m.id not in external:
                    raise CoverageError("external module %s needs a prediction file" % m.id)
                m.bind(external[m.id])
            matrix[m.id] = m.predict(docs)
        return matrix

    def predict_proba(self, docs, external=None):
        matrix = self.module_matrix(docs, external)
        ds = assemble_meta(matrix, docs, self.token_features(docs), self.config.meta_features,
                           self.config.meta_window, self.task, schema=self.meta.schema)
        return predict_proba(self.meta, ds)

    def predict_labels(self, docs, external=None):
        """Raw metalearner labels, one flat list over all tokens of ``docs``."""
        if not docs:
            return []
        proba = self.predict_proba(docs, external)
        return [self.meta.classes[i] for i in np.argmax(proba, axis=1)]

    def to_bytes(self):
        mods = []
        for m in self.modules:
            mods.append({"class": type(m).__name__, "id": m.id, "config": m.config,
                         "state": m.state()})
        payload = {"task": self.task, "config": self.config.to_text(),
                   "featurizer": self.featurizer.state(), "modules": mods,
                   "meta": self.meta.state()}
        return serialize.dumps(payload, MODEL_KIND, self.fingerprint)

    @classmethod
    def from_bytes(cls, data):
        _, fingerprint, payload = serialize.loads(data, MODEL_KIND)
        meta = TrainedModel.from_state(payload["meta"])
        if meta.fingerprint != fingerprint:
            from ..errors import SchemaMismatchError
            raise SchemaMismatchError("model fingerprint %s does not match its metalearner "
                                      "schema %s" % (fingerprint[:12], meta.fingerprint[:12]))
        task = payload["task"]
        config = PipelineConfig.from_text(payload["config"], task)
        modules = []
        for entry in payload["modules"]:
            if entry["class"] == "ExternalModule":
                m = ExternalModule(entry["id"]).load_state(entry["state"])
            else:
                m = REGISTRY[entry["class"]](**entry["config"]).load_state(entry["state"])
            modules.append(m)
        return cls(task, config, TokenFeaturizer.from_state(payload["featurizer"]), modules, meta)

    def save(self, path):
        with open(path, "wb") as f:
            f.write(self.to_bytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as f:
            return cls.from_bytes(f.read())


def _external_modules(cfg, external):
    external = external or {}
    mods = []
    for mid in cfg.external:
        if mid not in external:
            raise ConfigError("external module %s has no prediction file" % mid)
        mods.append(ExternalModule(mid, external[mid]))
    for mid in external:
        if mid not in cfg.external:
            mods.append(ExternalModule(mid, external[mid]))
    return mods


def _filter_meta(ds):
    token_names = [n for n in ds.schema.names if ":" not in n]
    if not token_names:
        return ds
    kept = set(filter_redundant(ds.records, ds.schema.select(token_names)).names)
    kept.update(n for n in ds.schema.names if ":" in n)
    return ds.with_schema(ds.schema.select(kept))


def train_ensemble(task, train_docs, dev_docs, cfg, modules, cache_dir=None, audit=None,
                   jobs=1):
    """Multitrain ``modules``, fit the metalearner on their out-of-fold
    columns, then refit every module on all training data."""
    if not train_docs:
        raise GumdropError("training corpus is empty")
    if not dev_docs:
        raise GumdropError("dev corpus is empty; metalearner selection needs dev data")
    if not modules:
        raise ConfigError("at least one base module must be enabled")
    ids = [m.id for m in modules]
    if len(set(ids)) != len(ids):
        raise ConfigError("base module ids must be unique")
    folds = make_folds(train_docs, cfg.folds, cfg.seed)
    matrix = MultitrainMatrix()
    for m in modules:
        matrix[m.id] = multitrain(m, train_docs, folds, cache_dir=cache_dir, audit=audit,
                                  jobs=jobs)
    featurizer = make_featurizer({"language": cfg.language, "pos_source": cfg.pos_source,
                                  "clausal_relations": cfg.clausal_relations})
    feature_docs = flat_docs(train_docs) if task == "sent" else train_docs
    featurizer.fit(feature_docs)
    fitted = [m if m.external else m.clone().fit(train_docs) for m in modules]
    model = EnsembleModel(task, cfg, featurizer, fitted, None)

    ds = assemble_meta(matrix, train_docs, model.token_features(train_docs), cfg.meta_features,
                       cfg.meta_window, task)
    if task != "sent" and cfg.filter_meta:
        ds = _filter_meta(ds)
    dev_matrix = MultitrainMatrix((m.id, m.predict(dev_docs)) for m in fitted)
    dev = assemble_meta(dev_matrix, dev_docs, model.token_features(dev_docs), cfg.meta_features,
                        cfg.meta_window, task, schema=ds.schema)
    params = {k: cfg.learner(k) for k in cfg.meta_candidates}
    model.meta = train_meta(ds, cfg.meta_candidates, dev, POSITIVE[task], params, cfg.seed,
                            jobs=jobs)
    log.info("%s metalearner: %s (dev F %.4f)", task, model.meta.kind,
             model.meta.info["dev_f"])
    return model


# sentence splitting

def _select_mlp_window(train_docs, dev_docs, cfg):
    windows = cfg.learner("mlp")["windows"]
    if len(windows) == 1:
        return windows[0]
    gold = sent_labels(dev_docs)
    best = None
    for w in windows:
        module = build_modules(PipelineConfig(task="sent", modules=("mlp",),
                                              learners=cfg.learners, seed=cfg.seed,
                                              language=cfg.language,
                                              pos_source=cfg.pos_source), mlp_window=w)[0]
        col = module.fit(train_docs).predict(dev_docs)
        f = label_f1(gold, col.labels, {SENT_START})
        log.info("mlp window %d: dev F %.4f", w, f)
        if best is None or f > best[1]:
            best = (w, f)
    return best[0]


def train_sentencer(train_docs, dev_docs, cfg, external=None, cache_dir=None, audit=None,
                    jobs=1):
    if cfg.task != "sent":
        raise ConfigError("sentencer needs a sent config")
    if not dev_docs:
        raise GumdropError("dev corpus is empty; metalearner selection needs dev data")
    if sum(len(d.sentences) for d in train_docs) <= len(train_docs) and \
            not any(t.sent_initial for d in train_docs for t in d.tokens[1:]):
        raise GumdropError("training corpus carries no gold sentence splits")
    mlp_window = _select_mlp_window(train_docs, dev_docs, cfg) if "mlp" in cfg.modules else None
    modules = build_modules(cfg, mlp_window) + _external_modules(cfg, external)
    return train_ensemble("sent", train_docs, dev_docs, cfg, modules, cache_dir, audit, jobs)


def predict_sentences(model, docs, external=None):
    """Split flat documents into sentences; the first token always starts one."""
    single = isinstance(docs, corpus.Document)
    docs = [docs] if single else list(docs)
    labels = iter(model.predict_labels(docs, external))
    out = []
    for d in docs:
        starts = [next(labels) == SENT_START for _ in range(len(d))]
        out.append(corpus.resplit(d, starts))
    return out[0] if single else out


# segmentation

def train_segmenter(train_docs, dev_docs, cfg, external=None, cache_dir=None, audit=None,
                    jobs=1):
    if cfg.task != "seg":
        raise ConfigError("segmenter needs a seg config")
    require_syntax(train_docs)
    require_syntax(dev_docs)
    modules = build_modules(cfg) + _external_modules(cfg, external)
    return train_ensemble("seg", train_docs, dev_docs, cfg, modules, cache_dir, audit, jobs)


def predict_segments(model, docs, external=None, force_sentence_starts=None):
    """Documents relabeled with predicted BeginSeg/NoSeg."""
    require_syntax(docs)
    force = model.config.force_sentence_starts if force_sentence_starts is None \
        else force_sentence_starts
    labels = iter(model.predict_labels(docs, external))
    out = []
    for d in docs:
        labs = []
        for t in d.tokens:
            lab = next(labels)
            if force and t.sent_initial:
                lab = BEGIN_SEG
            labs.append(lab if lab in (BEGIN_SEG, NO_SEG) else NO_SEG)
        out.append(corpus.relabel(d, "seg", labs))
    return out


def baseline_segment_by_sentence(docs):
    return [corpus.relabel(d, "seg", [BEGIN_SEG if t.sent_initial else NO_SEG for t in d.tokens])
            for d in docs]


# connectives

def train_connective(train_docs, dev_docs, cfg, external=None, cache_dir=None, audit=None,
                     jobs=1):
    if cfg.task != "conn":
        raise ConfigError("connective detector needs a conn config")
    modules = build_modules(cfg) + _external_modules(cfg, external)
    return train_ensemble("conn", train_docs, dev_docs, cfg, modules, cache_dir, audit, jobs)


def repair_conn_labels(labels):
    """Rewrite an I-Conn not preceded by B-Conn or I-Conn as B-Conn."""
    out = []
    prev = OUT
    for lab in labels:
        if lab == I_CONN and prev not in (B_CONN, I_CONN):
            lab = B_CONN
        out.append(lab)
        prev = lab
    return out


def predict_connectives(model, docs, external=None):
    labels = iter(model.predict_labels(docs, external))
    out = []
    for d in docs:
        labs = repair_conn_labels([next(labels) for _ in range(len(d))])
        out.append(corpus.relabel(d, "conn", labs))
    return out


TRAINERS = {"sent": train_sentencer, "seg": train_segmenter, "conn": train_connective}
