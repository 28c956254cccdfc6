"""Datasets and one-hot encoding of mixed categorical/numeric records."""

import numpy as np

from ..errors import SchemaMismatchError
from ..features.schema import CATEGORICAL, FeatureSchema


class Encoding:
    """Column layout: one block of |vocab|+1 columns per categorical entry
    (the last is UNK), one column per numeric entry."""

    def __init__(self, schema):
        self.schema = schema
        self.blocks = []
        offset = 0
        for e in schema.entries:
            if e.kind == CATEGORICAL:
                index = {v: i for i, v in enumerate(e.vocabulary)}
                self.blocks.append((e.name, offset, index))
                offset += len(e.vocabulary) + 1
            else:
                self.blocks.append((e.name, offset, None))
                offset += 1
        self.width = offset

    def column_names(self):
        names = []
        for e, (name, _, index) in zip(self.schema.entries, self.blocks):
            if index is None:
                names.append(name)
            else:
                names.extend("%s=%s" % (name, v) for v in e.vocabulary)
                names.append("%s=<UNK>" % name)
        return names

    def encode(self, record):
        return self.encode_many([record])[0]

    def encode_many(self, records):
        X = np.zeros((len(records), self.width))
        rows = np.arange(len(records))
        for name, offset, index in self.blocks:
            try:
                values = [r[name] for r in records]
            except KeyError:
                raise SchemaMismatchError("record lacks feature %r" % name) from None
            if index is None:
                X[:, offset] = np.asarray(values, dtype=float)
            else:
                unk = len(index)
                cols = np.fromiter((index.get(str(v), unk) for v in values), dtype=np.int64,
                                   count=len(values))
                X[rows, offset + cols] = 1.0
        return X


def encode(record, encoding):
    return encoding.encode(record)


class Dataset:
    """Records with labels against a fixed schema; ``X`` is the encoded matrix."""

    def __init__(self, records, labels, schema, X=None):
        if len(records) != len(labels):
            raise ValueError("%d records but %d labels" % (len(records), len(labels)))
        self.records = records
        self.labels = list(labels)
        self.schema = schema
        self.encoding = Encoding(schema)
        self._X = X

    @classmethod
    def build(cls, records, labels, schema=None, kinds=None, max_vocab=None):
        if schema is None:
            schema = FeatureSchema.infer(records, kinds=kinds, max_vocab=max_vocab)
        return cls(records, labels, schema)

    @property
    def X(self):
        if self._X is None:
            self._X = self.encoding.encode_many(self.records)
        return self._X

    def __len__(self):
        return len(self.labels)

    def subset(self, idx):
        idx = np.asarray(idx, dtype=int)
        return Dataset([self.records[i] for i in idx], [self.labels[i] for i in idx],
                       self.schema, None if self._X is None else self._X[idx])

    def with_schema(self, schema):
        return Dataset(self.records, self.labels, schema)


def as_matrix(model_schema, data):
    """Encoded matrix for ``data`` (Dataset, record or record list) under a
    model's schema; rejects datasets built against another schema."""
    fingerprint = model_schema.fingerprint()
    if isinstance(data, Dataset):
        if data.schema.fingerprint() != fingerprint:
            raise SchemaMismatchError("dataset schema fingerprint %s does not match model %s"
                                      % (data.schema.fingerprint()[:12], fingerprint[:12]))
        return data.X
    if isinstance(data, np.ndarray):
        if data.ndim != 2 or data.shape[1] != Encoding(model_schema).width:
            raise SchemaMismatchError("matrix width does not match the model encoding")
        return data
    records = [data] if isinstance(data, dict) else list(data)
    expected = set(model_schema.names)
    for r in records:
        if set(r) != expected:
            missing = sorted(expected - set(r))
            extra = sorted(set(r) - expected)
            raise SchemaMismatchError("record does not match model schema (missing %s, extra %s)"
                                      % (missing[:3], extra[:3]))
    return Encoding(model_schema).encode_many(records)
