"""Window MLP classifier: per-slot trainable embeddings, ReLU layers, softmax."""

import numpy as np

from ..features.schema import CATEGORICAL
from .data import Encoding, as_matrix
from .model import TrainedModel

DEFAULTS = dict(embed_dim=16, hidden_dims=(64,), window=5, epochs=10, lr=0.05,
                momentum=0.9, batch_size=32, seed=0)


def _split_inputs(schema, X):
    """Recover per-slot category codes and the numeric block from one-hot X."""
    enc = Encoding(schema)
    codes, num = [], []
    for e, (_, offset, index) in zip(schema.entries, enc.blocks):
        if e.kind == CATEGORICAL:
            codes.append(np.argmax(X[:, offset:offset + len(index) + 1], axis=1))
        else:
            num.append(X[:, offset])
    n = X.shape[0]
    codes = np.column_stack(codes) if codes else np.zeros((n, 0), dtype=np.int64)
    num = np.column_stack(num) if num else np.zeros((n, 0))
    return codes.astype(np.int64), num


def init_params(schema, n_classes, embed_dim, hidden_dims, rng):
    params = {}
    n_cat = 0
    n_num = 0
    for e in schema.entries:
        if e.kind == CATEGORICAL:
            params["emb%d" % n_cat] = rng.uniform(-0.1, 0.1, (len(e.vocabulary) + 1, embed_dim))
            n_cat += 1
        else:
            n_num += 1
    width = n_cat * embed_dim + n_num
    dims = [width] + list(hidden_dims) + [n_classes]
    for layer, (a, b) in enumerate(zip(dims[:-1], dims[1:])):
        bound = np.sqrt(6.0 / (a + b))
        params["W%d" % layer] = rng.uniform(-bound, bound, (a, b))
        params["b%d" % layer] = np.zeros(b)
    return params


def _n_layers(params):
    return sum(1 for k in params if k.startswith("W"))


def mlp_loss_and_grad(params, codes, num, y):
    """Mean cross-entropy of the network on (codes, num) against class ids y."""
    n = len(y)
    n_cat = codes.shape[1]
    parts = [params["emb%d" % j][codes[:, j]] for j in range(n_cat)]
    h = np.concatenate(parts + [num], axis=1) if parts or num.size else np.zeros((n, 0))
    acts, pre = [h], []
    L = _n_layers(params)
    for layer in range(L):
        z = acts[-1] @ params["W%d" % layer] + params["b%d" % layer]
        pre.append(z)
        acts.append(np.maximum(z, 0.0) if layer < L - 1 else z)
    logits = acts[-1]
    zs = logits - logits.max(axis=1, keepdims=True)
    logp = zs - np.log(np.exp(zs).sum(axis=1, keepdims=True))
    loss = -logp[np.arange(n), y].mean()

    grads = {}
    delta = np.exp(logp)
    delta[np.arange(n), y] -= 1.0
    delta /= n
    for layer in range(L - 1, -1, -1):
        grads["W%d" % layer] = acts[layer].T @ delta
        grads["b%d" % layer] = delta.sum(axis=0)
        delta = delta @ params["W%d" % layer].T
        if layer > 0:
            delta = delta * (pre[layer - 1] > 0)
    e = params["emb0"].shape[1] if n_cat else 0
    for j in range(n_cat):
        g = np.zeros_like(params["emb%d" % j])
        np.add.at(g, codes[:, j], delta[:, j * e:(j + 1) * e])
        grads["emb%d" % j] = g
    return loss, grads


def _forward_proba(params, codes, num):
    n = codes.shape[0]
    parts = [params["emb%d" % j][codes[:, j]] for j in range(codes.shape[1])]
    h = np.concatenate(parts + [num], axis=1) if parts or num.size else np.zeros((n, 0))
    L = _n_layers(params)
    for layer in range(L):
        h = h @ params["W%d" % layer] + params["b%d" % layer]
        if layer < L - 1:
            h = np.maximum(h, 0.0)
    h = h - h.max(axis=1, keepdims=True)
    E = np.exp(h)
    return E / E.sum(axis=1, keepdims=True)


def train_mlp(ds, params=None, **overrides):
    if len(ds) == 0:
        raise ValueError("cannot train on an empty dataset")
    p = dict(DEFAULTS)
    p.update(params or {})
    p.update(overrides)
    if p["embed_dim"] < 1:
        raise ValueError("embed_dim must be at least 1")
    classes = sorted(set(ds.labels), key=str)
    index = {c: i for i, c in enumerate(classes)}
    y = np.array([index[c] for c in ds.labels])
    codes, num = _split_inputs(ds.schema, ds.X)
    mu = num.mean(axis=0) if num.size else np.zeros(num.shape[1])
    sd = num.std(axis=0) if num.size else np.ones(num.shape[1])
    sd = np.where(sd > 0, sd, 1.0)
    num = (num - mu) / sd
    rng = np.random.default_rng(p["seed"])
    weights = init_params(ds.schema, len(classes), p["embed_dim"], p["hidden_dims"], rng)
    velocity = {k: np.zeros_like(v) for k, v in weights.items()}
    n = len(y)
    for _ in range(p["epochs"]):
        order = rng.permutation(n)
        for start in range(0, n, p["batch_size"]):
            batch = order[start:start + p["batch_size"]]
            _, grads = mlp_loss_and_grad(weights, codes[batch], num[batch], y[batch])
            for k, g in grads.items():
                velocity[k] = p["momentum"] * velocity[k] - p["lr"] * g
                weights[k] += velocity[k]
    weights["num_mean"] = mu
    weights["num_scale"] = sd
    info = {k: (list(v) if isinstance(v, tuple) else v) for k, v in p.items()}
    return TrainedModel("mlp", weights, ds.schema, tuple(classes), info)


def predict_mlp(model, data):
    single = isinstance(data, dict)
    X = as_matrix(model.schema, data)
    codes, num = _split_inputs(model.schema, X)
    p = model.params
    num = (num - p["num_mean"]) / p["num_scale"]
    weights = {k: v for k, v in p.items() if not k.startswith("num_")}
    out = _forward_proba(weights, codes, num)
    return out[0] if single else out
