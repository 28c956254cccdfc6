"""The trained-model record shared by every learner, and its persistence."""

from dataclasses import dataclass, field

import numpy as np

from .. import serialize
from ..errors import SchemaMismatchError
from ..features.schema import FeatureSchema

KINDS = ("logistic", "ridge", "tree", "forest", "extratrees", "gbt", "mlp")


@dataclass
class TrainedModel:
    kind: str
    params: dict
    schema: FeatureSchema
    classes: tuple = ()
    info: dict = field(default_factory=dict)

    @property
    def fingerprint(self):
        return self.schema.fingerprint()

    def state(self):
        return {"kind": self.kind, "params": self.params, "schema": self.schema.to_text(),
                "classes": list(self.classes), "info": self.info}

    @classmethod
    def from_state(cls, state):
        return cls(state["kind"], state["params"], FeatureSchema.from_text(state["schema"]),
                   tuple(state["classes"]), state.get("info", {}))

    def to_bytes(self):
        return serialize.dumps(self.state(), "learner", self.fingerprint)

    @classmethod
    def from_bytes(cls, data, expect_fingerprint=None):
        _, fingerprint, state = serialize.loads(data, "learner")
        model = cls.from_state(state)
        if model.fingerprint != fingerprint:
            raise SchemaMismatchError("stored fingerprint does not match stored schema")
        if expect_fingerprint is not None and fingerprint != expect_fingerprint:
            raise SchemaMismatchError("model fingerprint %s, expected %s"
                                      % (fingerprint[:12], expect_fingerprint[:12]))
        return model


def predict_proba(model, data):
    """Class-probability matrix (rows sum to 1) for any classifier kind."""
    from . import linear, mlp, trees
    if model.kind == "logistic":
        return linear.predict_linear(model, data)
    if model.kind in ("tree", "forest", "extratrees", "gbt"):
        return trees.predict_tree_ensemble(model, data)
    if model.kind == "mlp":
        return mlp.predict_mlp(model, data)
    raise ValueError("%s models do not produce class probabilities" % model.kind)


def predict_labels(model, data):
    proba = predict_proba(model, data)
    if proba.ndim == 1:
        proba = proba[None, :]
    return [model.classes[i] for i in np.argmax(proba, axis=1)]
