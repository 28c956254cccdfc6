"""Feature schemas and sliding-window record construction."""

import hashlib
from dataclasses import dataclass

from ..errors import ConfigError
from .syntax import WINDOW_SLOTS

CATEGORICAL = "categorical"
NUMERIC = "numeric"

BOS = "<s>"
EOS = "</s>"

# Every per-token feature the featurizer can produce, with its kind.
TOKEN_FEATURES = {
    "word": CATEGORICAL, "word100": CATEGORICAL, "word200": CATEGORICAL,
    "wordlex": CATEGORICAL, "upos": CATEGORICAL, "xpos": CATEGORICAL,
    "case": CATEGORICAL, "first": CATEGORICAL, "last": CATEGORICAL,
    "genre": CATEGORICAL, "deprel": CATEGORICAL, "headbin": CATEGORICAL,
    "depbracket": CATEGORICAL, "tok_pos": CATEGORICAL,
    "digits": NUMERIC, "consonants": NUMERIC, "vowels": NUMERIC, "other": NUMERIC,
    "tok_len": NUMERIC, "tok_frq": NUMERIC, "quote": NUMERIC, "paren": NUMERIC,
    "sent_pct": NUMERIC, "headdist": NUMERIC, "sent_len": NUMERIC,
}

CHILDREN_FEATURES = {"lspan": NUMERIC, "rspan": NUMERIC, "lchild_close": CATEGORICAL,
                     "lchild_far": CATEGORICAL, "rchild_close": CATEGORICAL,
                     "rchild_far": CATEGORICAL}
for _slot in WINDOW_SLOTS:
    CHILDREN_FEATURES[_slot + "_deprel"] = CATEGORICAL
    CHILDREN_FEATURES[_slot + "_depth"] = NUMERIC
    CHILDREN_FEATURES[_slot + "_samepar_l"] = NUMERIC
    CHILDREN_FEATURES[_slot + "_samepar_r"] = NUMERIC

ALL_FEATURES = dict(TOKEN_FEATURES, **CHILDREN_FEATURES)


def feature_kind(name):
    base = name.split("@", 1)[0]
    try:
        return ALL_FEATURES[base]
    except KeyError:
        raise ConfigError("unknown feature %r" % base) from None


def check_feature_names(names):
    for name in names:
        feature_kind(name)


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str
    vocabulary: tuple = ()


@dataclass(frozen=True)
class FeatureSchema:
    entries: tuple

    def __post_init__(self):
        names = [e.name for e in self.entries]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate feature names in schema")

    @property
    def names(self):
        return [e.name for e in self.entries]

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, name):
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def select(self, names):
        keep = set(names)
        return FeatureSchema(tuple(e for e in self.entries if e.name in keep))

    def to_text(self):
        lines = []
        for e in self.entries:
            lines.append("\t".join([e.name, e.kind] + list(e.vocabulary)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        entries = []
        for line in text.splitlines():
            if not line:
                continue
            parts = line.split("\t")
            entries.append(FeatureSpec(parts[0], parts[1], tuple(parts[2:])))
        return cls(tuple(entries))

    def fingerprint(self):
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()

    @classmethod
    def infer(cls, records, names=None, kinds=None, max_vocab=None):
        """Build a schema from training records.

        Kinds come from ``kinds`` (name -> kind), else from the value types.
        Categorical vocabularies are the sorted observed values, optionally
        capped to the ``max_vocab`` most frequent.
        """
        if not records:
            raise ValueError("cannot infer a schema from no records")
        if names is None:
            names = list(records[0].keys())
        entries = []
        for name in names:
            kind = (kinds or {}).get(name)
            if kind is None:
                kind = NUMERIC if isinstance(records[0][name], (int, float)) else CATEGORICAL
            if kind == CATEGORICAL:
                counts = {}
                for r in records:
                    v = str(r[name])
                    counts[v] = counts.get(v, 0) + 1
                vocab = sorted(counts)
                if max_vocab is not None and len(vocab) > max_vocab:
                    top = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:max_vocab]
                    vocab = sorted(v for v, _ in top)
                entries.append(FeatureSpec(name, kind, tuple(vocab)))
            else:
                entries.append(FeatureSpec(name, kind))
        return cls(tuple(entries))


def window_names(names, window_size):
    k = (window_size - 1) // 2
    return ["%s@%+d" % (name, off) if off else "%s@0" % name
            for off in range(-k, k + 1) for name in names]


def window_features(doc_feats, position, window_size, names):
    """Concatenate the named features of positions p-k..p+k.

    ``doc_feats`` holds one feature dict per token of the document; slots
    falling outside it are filled with ``<s>`` / ``</s>`` (0.0 for numeric
    features).
    """
    if window_size < 1 or window_size % 2 == 0:
        raise ConfigError("window size must be odd and positive, got %r" % window_size)
    kinds = [feature_kind(n) for n in names]
    k = (window_size - 1) // 2
    n = len(doc_feats)
    record = {}
    for off in range(-k, k + 1):
        p = position + off
        suffix = "@%+d" % off if off else "@0"
        if 0 <= p < n:
            src = doc_feats[p]
            for name in names:
                record[name + suffix] = src[name]
        else:
            sentinel = BOS if p < 0 else EOS
            for name, kind in zip(names, kinds):
                record[name + suffix] = sentinel if kind == CATEGORICAL else 0.0
    return record


def window_records(doc_feats, window_size, names):
    return [window_features(doc_feats, p, window_size, names) for p in range(len(doc_feats))]
