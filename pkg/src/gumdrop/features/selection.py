"""Redundant-feature filtering by Theil's U (categorical) and Pearson's r (numeric)."""

import numpy as np

from .schema import CATEGORICAL, FeatureSchema


def _codes(values):
    _, inverse = np.unique(np.asarray([str(v) for v in values], dtype=object).astype(str),
                           return_inverse=True)
    return inverse.ravel()


def _entropy(counts):
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def theils_u(x, y):
    """Uncertainty coefficient U(y|x): the share of H(y) explained by x."""
    if len(x) != len(y):
        raise ValueError("series lengths differ: %d vs %d" % (len(x), len(y)))
    if len(x) == 0:
        raise ValueError("theils_u needs nonempty series")
    xc = x if isinstance(x, np.ndarray) and x.dtype.kind == "i" else _codes(x)
    yc = y if isinstance(y, np.ndarray) and y.dtype.kind == "i" else _codes(y)
    return _theils_u_codes(xc, yc)


def _theils_u_codes(xc, yc):
    h_y = _entropy(np.bincount(yc).astype(float))
    if h_y == 0.0:
        return 1.0
    ny = yc.max() + 1
    joint = np.bincount(xc * ny + yc).astype(float)
    h_xy = _entropy(joint)
    h_x = _entropy(np.bincount(xc).astype(float))
    u = (h_y - (h_xy - h_x)) / h_y
    return min(max(u, 0.0), 1.0)


def pearson(a, b):
    """Pearson's r; a constant column correlates 1 with another constant, else 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    sa, sb = a.std(), b.std()
    if sa == 0.0 or sb == 0.0:
        return 1.0 if sa == 0.0 and sb == 0.0 else 0.0
    return float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))


def filter_redundant(records, schema, u_threshold=0.98, r_threshold=0.95):
    """Drop categorical features predictable from another surviving one
    (U(A|B) above ``u_threshold`` drops A) and numeric features correlated
    beyond ``r_threshold`` with an earlier surviving one."""
    if not records:
        raise ValueError("filter_redundant needs a nonempty matrix")
    cat = [e.name for e in schema.entries if e.kind == CATEGORICAL]
    num = [e.name for e in schema.entries if e.kind != CATEGORICAL]
    codes = {name: _codes([r[name] for r in records]) for name in cat}
    dropped = set()
    for a in cat:
        for b in cat:
            if b == a or b in dropped:
                continue
            if _theils_u_codes(codes[b], codes[a]) > u_threshold:
                dropped.add(a)
                break
    cols = {name: np.asarray([float(r[name]) for r in records]) for name in num}
    for i, a in enumerate(num):
        if a in dropped:
            continue
        for b in num[i + 1:]:
            if b not in dropped and abs(pearson(cols[a], cols[b])) > r_threshold:
                dropped.add(b)
    return FeatureSchema(tuple(e for e in schema.entries if e.name not in dropped))
