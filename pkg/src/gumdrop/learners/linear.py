"""L2-regularized logistic regression and ridge regression with CV over a grid."""

import numpy as np
import scipy.sparse as sp

from .data import as_matrix
from .model import TrainedModel


def _softmax(Z):
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def logistic_loss_grad(W, b, X, Y, lam):
    """Mean cross-entropy plus (lam/2)||W||^2, and its gradient.

    ``Y`` is the one-hot target matrix (n x K).
    """
    n = X.shape[0]
    Z = X @ W + b
    Zs = Z - Z.max(axis=1, keepdims=True)
    logp = Zs - np.log(np.exp(Zs).sum(axis=1, keepdims=True))
    loss = -(Y * logp).sum() / n + 0.5 * lam * (W * W).sum()
    R = (np.exp(logp) - Y) / n
    gW = X.T @ R + lam * W
    gb = R.sum(axis=0)
    return loss, np.asarray(gW), np.asarray(gb)


def _fit_logistic(X, Y, lam, max_iter=500, tol=1e-6, W0=None, b0=None):
    d, K = X.shape[1], Y.shape[1]
    W = np.zeros((d, K)) if W0 is None else W0.copy()
    b = np.zeros(K) if b0 is None else b0.copy()
    step = 1.0
    loss, gW, gb = logistic_loss_grad(W, b, X, Y, lam)
    for _ in range(max_iter):
        gsq = float((gW * gW).sum() + (gb * gb).sum())
        if np.sqrt(gsq) <= tol:
            break
        t = step
        while True:
            W2, b2 = W - t * gW, b - t * gb
            loss2, gW2, gb2 = logistic_loss_grad(W2, b2, X, Y, lam)
            if loss2 <= loss - 0.5 * t * gsq or t < 1e-12:
                break
            t *= 0.5
        # Barzilai-Borwein guess for the next trial step
        sW, sb = W2 - W, b2 - b
        yW, yb = gW2 - gW, gb2 - gb
        sy = float((sW * yW).sum() + (sb * yb).sum())
        step = float((sW * sW).sum() + (sb * sb).sum()) / sy if sy > 1e-16 else 2 * t
        step = min(max(step, 1e-8), 1e6)
        W, b, loss, gW, gb = W2, b2, loss2, gW2, gb2
    return W, b


def _kfold(n, k, seed):
    order = np.random.default_rng(seed).permutation(n)
    return [order[i::k] for i in range(k)]


def _scale(X):
    """Per-column scale: std for non-binary columns, 1 for 0/1 columns."""
    X = np.asarray(X)
    scale = np.ones(X.shape[1])
    binary = np.all((X == 0) | (X == 1), axis=0)
    sd = X.std(axis=0)
    mask = ~binary & (sd > 0)
    scale[mask] = sd[mask]
    return scale


def train_linear(ds, task="logistic", reg_grid=(0.01, 0.1, 1.0), folds=5, seed=0,
                 max_iter=500, tol=1e-6, fit_intercept=True):
    """Fit logistic (class labels) or ridge (real labels) with the regularization
    strength picked by k-fold CV over ``reg_grid``."""
    if len(ds) == 0:
        raise ValueError("cannot train on an empty dataset")
    reg_grid = list(reg_grid)
    if not reg_grid:
        raise ValueError("reg_grid must be nonempty")
    X = ds.X
    k = min(folds, len(ds))
    splits = _kfold(len(ds), k, seed) if k >= 2 and len(reg_grid) > 1 else None

    if task == "ridge":
        y = np.asarray(ds.labels, dtype=float)
        best = reg_grid[0]
        if splits is not None:
            errors = []
            for lam in reg_grid:
                err = 0.0
                for held in splits:
                    train = np.setdiff1d(np.arange(len(ds)), held)
                    w, b = _solve_ridge(X[train], y[train], lam, fit_intercept)
                    err += float(((X[held] @ w + b - y[held]) ** 2).sum())
                errors.append(err)
            best = reg_grid[int(np.argmin(errors))]
        w, b = _solve_ridge(X, y, best, fit_intercept)
        return TrainedModel("ridge", {"w": w, "b": float(b), "lam": float(best)}, ds.schema)

    if task != "logistic":
        raise ValueError("unknown linear task %r" % task)
    classes = sorted(set(ds.labels), key=str)
    if len(classes) == 1:
        return TrainedModel("logistic", {"W": np.zeros((X.shape[1], 1)), "b": np.zeros(1),
                                         "scale": np.ones(X.shape[1]), "lam": float(reg_grid[0])},
                            ds.schema, tuple(classes))
    index = {c: i for i, c in enumerate(classes)}
    y = np.array([index[c] for c in ds.labels])
    Y = np.eye(len(classes))[y]
    scale = _scale(X)
    Xs = sp.csr_matrix(X / scale)
    best = reg_grid[0]
    if splits is not None:
        losses = np.zeros(len(reg_grid))
        for held in splits:
            train = np.setdiff1d(np.arange(len(ds)), held)
            W = b = None
            # strongest penalty first; each fit warm-starts the next
            for j in np.argsort(reg_grid)[::-1]:
                W, b = _fit_logistic(Xs[train], Y[train], reg_grid[j], max_iter, tol, W, b)
                P = _softmax(np.asarray(Xs[held] @ W) + b)
                losses[j] += -np.log(np.clip(P[np.arange(len(held)), y[held]], 1e-15, None)).sum()
        best = reg_grid[int(np.argmin(losses))]
    W, b = _fit_logistic(Xs, Y, best, max_iter, tol)
    return TrainedModel("logistic", {"W": W, "b": b, "scale": scale, "lam": float(best)},
                        ds.schema, tuple(classes))


def _solve_ridge(X, y, lam, fit_intercept=True):
    if fit_intercept:
        mx, my = X.mean(axis=0), y.mean()
        Xc, yc = X - mx, y - my
    else:
        Xc, yc = X, y
    A = Xc.T @ Xc + lam * np.eye(X.shape[1])
    w = np.linalg.solve(A, Xc.T @ yc) if X.shape[1] else np.zeros(0)
    b = my - mx @ w if fit_intercept else 0.0
    return w, b


def predict_linear(model, data):
    """Logistic: probability matrix (or vector for a single record). Ridge: reals."""
    single = isinstance(data, dict)
    X = as_matrix(model.schema, data)
    p = model.params
    if model.kind == "ridge":
        out = X @ p["w"] + p["b"]
    else:
        out = _softmax((X / p["scale"]) @ p["W"] + p["b"])
    return out[0] if single else out
