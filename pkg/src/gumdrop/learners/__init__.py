from .data import Dataset, Encoding, encode
from .linear import logistic_loss_grad, predict_linear, train_linear
from .mlp import mlp_loss_and_grad, predict_mlp, train_mlp
from .model import TrainedModel, predict_labels, predict_proba
from .trees import predict_tree_ensemble, train_tree_ensemble


def train(ds, kind, params=None, seed=0):
    """Train any classifier kind with a flat parameter dict."""
    params = dict(params or {})
    if kind == "logistic":
        grid = params.pop("reg_grid", (0.01, 0.1, 1.0))
        params.pop("seed", None)
        return train_linear(ds, "logistic", grid, seed=seed, **params)
    if kind == "mlp":
        return train_mlp(ds, params, seed=seed)
    return train_tree_ensemble(ds, kind, params, seed=seed)


__all__ = [
    "Dataset", "Encoding", "encode", "logistic_loss_grad", "predict_linear", "train_linear",
    "mlp_loss_and_grad", "predict_mlp", "train_mlp", "TrainedModel", "predict_labels",
    "predict_proba", "predict_tree_ensemble", "train_tree_ensemble", "train",
]
