"""CART trees and tree ensembles: random forest, extra trees, gradient boosting.

Splits are searched over per-column candidate thresholds (midpoints between
distinct training values, or quantiles when a column has more than
``max_bins`` distinct values) with histogram accumulation, except extra
trees which draw one uniform random threshold per candidate column.
Every split sends ``x <= threshold`` left.
"""

import math

import numpy as np

from .data import as_matrix
from .model import TrainedModel

DEFAULTS = {
    "tree": dict(n_trees=1, max_depth=12, min_leaf=1),
    "forest": dict(n_trees=200, max_depth=12, min_leaf=1),
    "extratrees": dict(n_trees=200, max_depth=12, min_leaf=1),
    "gbt": dict(n_trees=200, max_depth=4, min_leaf=1, learning_rate=0.1, subsample=1.0,
                colsample=1.0, reg_lambda=1.0),
}


class _Binned:
    def __init__(self, X, max_bins=32):
        n, d = X.shape
        self.thresholds = []
        for j in range(d):
            col = X[:, j]
            u = np.unique(col)
            if len(u) <= max_bins + 1:
                t = (u[:-1] + u[1:]) / 2.0
            else:
                q = np.quantile(col, np.linspace(0, 1, max_bins + 1)[1:-1])
                t = np.unique(q)
                t = t[t < u[-1]]
            self.thresholds.append(t)
        self.nthr = np.array([len(t) for t in self.thresholds], dtype=np.int64)
        self.nbins = int(self.nthr.max()) + 1 if d else 1
        self.codes = np.empty((n, d), dtype=np.int32)
        for j, t in enumerate(self.thresholds):
            self.codes[:, j] = np.searchsorted(t, X[:, j], side="left")
        self.usable = np.flatnonzero(self.nthr > 0)


class _Gini:
    """Classification: stats are weighted one-hot class indicators."""

    def score(self, S):
        N = S.sum(axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = (S * S).sum(axis=-1) / N
        return np.where(N > 0, out, 0.0)

    def leaf(self, S):
        return S / S.sum()

    def pure(self, stats):
        return np.count_nonzero(stats.sum(axis=0)) <= 1


class _Newton:
    """Second-order regression: stats are (gradient, hessian) per sample."""

    def __init__(self, reg_lambda):
        self.lam = reg_lambda

    def score(self, S):
        return S[..., 0] ** 2 / (S[..., 1] + self.lam)

    def leaf(self, S):
        return np.array([-S[0] / (S[1] + self.lam)])

    def pure(self, stats):
        return np.ptp(stats[:, 0]) < 1e-12


def _best_hist_split(binned, idx, feats, stats, crit, min_leaf):
    codes = binned.codes[np.ix_(idx, feats)]
    n, f = codes.shape
    nb = binned.nbins
    key = (codes + (np.arange(f) * nb)[None, :]).ravel()
    S = stats.shape[1]
    hist = np.empty((f, nb, S))
    for s in range(S):
        w = np.broadcast_to(stats[:, s][:, None], (n, f)).ravel()
        hist[:, :, s] = np.bincount(key, weights=w, minlength=f * nb).reshape(f, nb)
    cnt = np.bincount(key, minlength=f * nb).reshape(f, nb)
    left = np.cumsum(hist, axis=1)[:, :-1, :]
    lcnt = np.cumsum(cnt, axis=1)[:, :-1]
    total = hist[0].sum(axis=0)
    right = total[None, None, :] - left
    gain = crit.score(left) + crit.score(right) - crit.score(total)
    valid = (lcnt >= min_leaf) & (n - lcnt >= min_leaf)
    valid &= np.arange(nb - 1)[None, :] < binned.nthr[feats][:, None]
    if not valid.any():
        return None
    gain = np.where(valid, gain, -np.inf)
    flat = int(np.argmax(gain))
    fi, s = divmod(flat, nb - 1)
    j = int(feats[fi])
    return gain.flat[flat], j, float(binned.thresholds[j][s]), binned.codes[idx, j] <= s


def _best_random_split(X, idx, feats, stats, crit, min_leaf, rng):
    sub = X[np.ix_(idx, feats)]
    lo, hi = sub.min(axis=0), sub.max(axis=0)
    live = hi > lo
    if not live.any():
        return None
    sub, lo, hi, feats = sub[:, live], lo[live], hi[live], feats[live]
    thr = lo + rng.random(len(feats)) * (hi - lo)
    L = sub <= thr[None, :]
    left = L.T.astype(float) @ stats
    total = stats.sum(axis=0)
    lcnt = L.sum(axis=0)
    n = len(idx)
    gain = crit.score(left) + crit.score(total[None, :] - left) - crit.score(total)
    valid = (lcnt >= min_leaf) & (n - lcnt >= min_leaf)
    if not valid.any():
        return None
    gain = np.where(valid, gain, -np.inf)
    fi = int(np.argmax(gain))
    return gain[fi], int(feats[fi]), float(thr[fi]), L[:, fi]


def _grow(X, binned, idx, stats, crit, max_depth, min_leaf, rng, max_features=None,
          allowed=None, random_splits=False):
    """Grow one tree over rows ``idx``; returns flat node arrays."""
    feature, threshold, left, right, value = [], [], [], [], []
    pool = binned.usable if allowed is None else np.intersect1d(binned.usable, allowed)
    if random_splits:
        pool = np.arange(X.shape[1]) if allowed is None else np.asarray(allowed)

    def new_node(rows):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(crit.leaf(stats[rows].sum(axis=0)))
        return len(feature) - 1

    root_rows = np.arange(len(idx))
    stack = [(new_node(root_rows), root_rows, 0)]
    while stack:
        node, rows, depth = stack.pop()
        if depth >= max_depth or len(rows) < 2 * min_leaf or crit.pure(stats[rows]) \
                or len(pool) == 0:
            continue
        feats = pool
        if max_features is not None and max_features < len(pool):
            feats = np.sort(rng.choice(pool, size=max_features, replace=False))
        if random_splits:
            found = _best_random_split(X, idx[rows], feats, stats[rows], crit, min_leaf, rng)
        else:
            found = _best_hist_split(binned, idx[rows], feats, stats[rows], crit, min_leaf)
        if found is None or not found[0] >= -1e-12:
            continue
        _, j, thr, goes_left = found
        feature[node] = j
        threshold[node] = thr
        lrows, rrows = rows[goes_left], rows[~goes_left]
        left[node] = new_node(lrows)
        right[node] = new_node(rrows)
        stack.append((right[node], rrows, depth + 1))
        stack.append((left[node], lrows, depth + 1))
    return {"feature": np.array(feature, dtype=np.int64),
            "threshold": np.array(threshold, dtype=float),
            "left": np.array(left, dtype=np.int64), "right": np.array(right, dtype=np.int64),
            "value": np.array(value, dtype=float)}


def _apply(tree, X):
    node = np.zeros(X.shape[0], dtype=np.int64)
    rows = np.arange(X.shape[0])
    feature, threshold = tree["feature"], tree["threshold"]
    while True:
        f = feature[node]
        inner = f >= 0
        if not inner.any():
            return tree["value"][node]
        go_left = X[rows, np.where(inner, f, 0)] <= threshold[node]
        node = np.where(inner, np.where(go_left, tree["left"][node], tree["right"][node]), node)


def _stack_trees(trees):
    """Pack a list of node-array dicts into flat arrays with offsets."""
    sizes = [len(t["feature"]) for t in trees]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    packed = {k: np.concatenate([t[k] for t in trees]) for k in ("feature", "threshold", "value")}
    for k in ("left", "right"):
        packed[k] = np.concatenate([np.where(t[k] >= 0, t[k] + o, -1)
                                    for t, o in zip(trees, offsets[:-1])])
    packed["offsets"] = offsets
    return packed


def _unstack(packed, i):
    lo, hi = packed["offsets"][i], packed["offsets"][i + 1]
    return {"feature": packed["feature"][lo:hi], "threshold": packed["threshold"][lo:hi],
            "left": np.where(packed["left"][lo:hi] >= 0, packed["left"][lo:hi] - lo, -1),
            "right": np.where(packed["right"][lo:hi] >= 0, packed["right"][lo:hi] - lo, -1),
            "value": packed["value"][lo:hi]}


def train_tree_ensemble(ds, kind="forest", params=None, **overrides):
    """Train a ``tree``, ``forest``, ``extratrees`` or ``gbt`` classifier."""
    if kind not in DEFAULTS:
        raise ValueError("unknown tree ensemble kind %r" % kind)
    p = dict(DEFAULTS[kind], seed=0, max_bins=32)
    p.update(params or {})
    p.update(overrides)
    if p["max_depth"] < 1:
        raise ValueError("max_depth must be at least 1")
    if p["n_trees"] < 1:
        raise ValueError("n_trees must be at least 1")
    if len(ds) == 0:
        raise ValueError("cannot train on an empty dataset")
    classes = sorted(set(ds.labels), key=str)
    X = ds.X
    index = {c: i for i, c in enumerate(classes)}
    y = np.array([index[c] for c in ds.labels])
    info = {k: v for k, v in p.items()}
    if len(classes) == 1:
        return TrainedModel(kind, {"constant": np.ones(1)}, ds.schema, tuple(classes), info)
    rng = np.random.default_rng(p["seed"])
    binned = _Binned(X, p["max_bins"])
    n, d = X.shape
    K = len(classes)

    if kind == "gbt":
        return _train_gbt(ds, X, y, classes, binned, p, rng, info)

    Y = np.eye(K)[y]
    crit = _Gini()
    trees = []
    max_features = None if kind == "tree" else max(1, int(math.sqrt(d)))
    for _ in range(p["n_trees"]):
        if kind == "forest":
            idx = np.sort(rng.integers(0, n, n))
        else:
            idx = np.arange(n)
        trees.append(_grow(X, binned, idx, Y[idx], crit, p["max_depth"], p["min_leaf"], rng,
                           max_features=max_features, random_splits=kind == "extratrees"))
    return TrainedModel(kind, _stack_trees(trees), ds.schema, tuple(classes), info)


def _gbt_margins_to_proba(F):
    if F.shape[1] == 1:
        p1 = 1.0 / (1.0 + np.exp(-F[:, 0]))
        return np.column_stack([1.0 - p1, p1])
    Z = F - F.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def _train_gbt(ds, X, y, classes, binned, p, rng, info):
    n, d = X.shape
    K = len(classes)
    M = 1 if K == 2 else K
    prior = np.bincount(y, minlength=K) / n
    if M == 1:
        base = np.array([math.log(prior[1] / prior[0])])
        T = (y == 1).astype(float)[:, None]
    else:
        base = np.log(np.clip(prior, 1e-12, None))
        T = np.eye(K)[y]
    F = np.tile(base, (n, 1))
    crit = _Newton(p["reg_lambda"])
    trees = []
    losses = []
    for _ in range(p["n_trees"]):
        P = _gbt_margins_to_proba(F)
        losses.append(_log_loss(P, y))
        Pm = P[:, 1:2] if M == 1 else P
        G = Pm - T
        H = np.maximum(Pm * (1.0 - Pm), 1e-16)
        rows = np.arange(n)
        if p["subsample"] < 1.0:
            rows = np.sort(rng.choice(n, size=max(1, int(round(p["subsample"] * n))), replace=False))
        allowed = None
        if p["colsample"] < 1.0:
            allowed = np.sort(rng.choice(d, size=max(1, int(round(p["colsample"] * d))),
                                         replace=False))
        for m in range(M):
            stats = np.column_stack([G[rows, m], H[rows, m]])
            tree = _grow(X, binned, rows, stats, crit, p["max_depth"], p["min_leaf"], rng,
                         allowed=allowed)
            tree["value"] = tree["value"][:, 0] * p["learning_rate"]
            trees.append(tree)
            F[:, m] += _apply(tree, X)
    losses.append(_log_loss(_gbt_margins_to_proba(F), y))
    info = dict(info, train_log_loss=losses)
    params = _stack_trees(trees)
    params["base"] = base
    params["n_margins"] = np.array([M])
    return TrainedModel("gbt", params, ds.schema, tuple(classes), info)


def _log_loss(P, y):
    return float(-np.log(np.clip(P[np.arange(len(y)), y], 1e-15, None)).mean())


def predict_tree_ensemble(model, data):
    single = isinstance(data, dict)
    X = as_matrix(model.schema, data)
    p = model.params
    if "constant" in p:
        out = np.ones((X.shape[0], 1))
    elif model.kind == "gbt":
        M = int(p["n_margins"][0])
        F = np.tile(p["base"], (X.shape[0], 1))
        for i in range(len(p["offsets"]) - 1):
            F[:, i % M] += _apply(_unstack(p, i), X)
        out = _gbt_margins_to_proba(F)
    else:
        ntrees = len(p["offsets"]) - 1
        out = np.zeros((X.shape[0], len(model.classes)))
        for i in range(ntrees):
            out += _apply(_unstack(p, i), X)
        out /= ntrees
    return out[0] if single else out
