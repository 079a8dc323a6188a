"""Fully-connected softmax classifier trained with Adam, in plain numpy."""

from __future__ import annotations

import json
import warnings
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ecosweep.errors import DataError, NonFiniteError

MODEL_FORMAT_VERSION = 1


def init_params(layer_sizes, rng) -> list[tuple[np.ndarray, np.ndarray]]:
    """Uniform fan-in-scaled weights, zero biases."""
    params = []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / fan_in)
        W = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        params.append((W, np.zeros(fan_out)))
    return params


def forward(params, X):
    """Return (class probabilities, per-layer activations)."""
    acts = [X]
    h = X
    for W, b in params[:-1]:
        h = np.maximum(0.0, h @ W + b)
        acts.append(h)
    W, b = params[-1]
    logits = h @ W + b
    logits = logits - logits.max(axis=1, keepdims=True)
    expz = np.exp(logits)
    probs = expz / expz.sum(axis=1, keepdims=True)
    return probs, acts


def loss_and_grads(params, X, y_idx, l2=0.0, sample_weight=None):
    """Weighted cross-entropy + l2 * sum of squared weights, with gradients.

    Gradients are exact analytic backprop values for every weight and bias.
    """
    n = len(X)
    probs, acts = forward(params, X)
    if sample_weight is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(sample_weight, dtype=float)
        w = w / w.sum()
    picked = probs[np.arange(n), y_idx]
    ce = float(-(w * np.log(np.maximum(picked, 1e-300))).sum())
    loss = ce + l2 * sum(float(np.sum(W * W)) for W, _ in params)

    delta = probs.copy()
    delta[np.arange(n), y_idx] -= 1.0
    delta = delta * w[:, None]
    grads = [None] * len(params)
    for layer in range(len(params) - 1, -1, -1):
        W, _ = params[layer]
        h_in = acts[layer]
        gW = h_in.T @ delta + 2.0 * l2 * W
        gb = delta.sum(axis=0)
        grads[layer] = (gW, gb)
        if layer > 0:
            delta = delta @ W.T
            delta[acts[layer] <= 0.0] = 0.0
    return loss, grads


class MLPSurrogate(BaseEstimator, ClassifierMixin):
    """Softmax MLP over [0, 1]-scaled levers (fixed class order by index).

    Inputs are affinely rescaled using ``bounds`` (lower, upper arrays);
    without explicit bounds the training data envelope is used.  Training is
    deterministic for a fixed ``train_seed``.
    """

    def __init__(self, hidden=(128, 128), l2=1e-4, epochs=300, batch_size=64,
                 lr=1e-3, train_seed=0, class_weight=None, n_classes=3,
                 bounds=None):
        self.hidden = hidden
        self.l2 = l2
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.train_seed = train_seed
        self.class_weight = class_weight
        self.n_classes = n_classes
        self.bounds = bounds

    def _scale(self, X):
        span = self.scale_hi_ - self.scale_lo_
        return (X - self.scale_lo_) / span

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        present = np.unique(y)
        if len(present) < 2:
            raise DataError("training data must contain at least 2 classes")
        if present.min() < 0 or present.max() >= self.n_classes:
            raise DataError(f"class indices must lie in [0, {self.n_classes})")
        self.classes_ = np.arange(self.n_classes)

        if self.bounds is not None:
            lo, hi = self.bounds
            self.scale_lo_ = np.asarray(lo, dtype=float)
            self.scale_hi_ = np.asarray(hi, dtype=float)
        else:
            self.scale_lo_ = X.min(axis=0)
            self.scale_hi_ = X.max(axis=0)
        span = self.scale_hi_ - self.scale_lo_
        self.scale_hi_ = np.where(span > 0, self.scale_hi_, self.scale_lo_ + 1.0)
        Xs = self._scale(X)

        if self.class_weight == "balanced":
            counts = np.bincount(y, minlength=self.n_classes).astype(float)
            counts[counts == 0] = 1.0
            cw = len(y) / (self.n_classes * counts)
            sw = cw[y]
        else:
            sw = np.ones(len(y))

        rng = np.random.default_rng(self.train_seed)
        sizes = [X.shape[1]] + list(self.hidden) + [self.n_classes]
        params = init_params(sizes, rng)

        # Adam moments per parameter tensor
        m = [(np.zeros_like(W), np.zeros_like(b)) for W, b in params]
        v = [(np.zeros_like(W), np.zeros_like(b)) for W, b in params]
        beta1, beta2, eps = 0.9, 0.999, 1e-8
        t = 0
        n = len(Xs)
        batch = max(1, min(self.batch_size, n))
        final_loss = np.nan
        for _ in range(self.epochs):
            order = rng.permutation(n)
            for start in range(0, n, batch):
                idx = order[start:start + batch]
                loss, grads = loss_and_grads(params, Xs[idx], y[idx], self.l2, sw[idx])
                if not np.isfinite(loss):
                    raise NonFiniteError(
                        f"non-finite training loss at step {t}; lower lr={self.lr}"
                    )
                t += 1
                corr1 = 1.0 - beta1 ** t
                corr2 = 1.0 - beta2 ** t
                for li in range(len(params)):
                    W, b = params[li]
                    gW, gb = grads[li]
                    mW, mb = m[li]
                    vW, vb = v[li]
                    mW[:] = beta1 * mW + (1 - beta1) * gW
                    mb[:] = beta1 * mb + (1 - beta1) * gb
                    vW[:] = beta2 * vW + (1 - beta2) * gW ** 2
                    vb[:] = beta2 * vb + (1 - beta2) * gb ** 2
                    W -= self.lr * (mW / corr1) / (np.sqrt(vW / corr2) + eps)
                    b -= self.lr * (mb / corr1) / (np.sqrt(vb / corr2) + eps)
                final_loss = loss
        self.params_ = params
        self.training_meta_ = {
            "epochs": self.epochs,
            "train_seed": self.train_seed,
            "final_loss": float(final_loss),
            "l2": self.l2,
            "lr": self.lr,
            "batch_size": self.batch_size,
            "hidden": list(self.hidden),
            "class_weight": self.class_weight,
        }
        return self

    def predict_proba(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if np.any(X < self.scale_lo_ - 1e-9) or np.any(X > self.scale_hi_ + 1e-9):
            warnings.warn("query point outside the training space; extrapolating")
        probs, _ = forward(self.params_, self._scale(X))
        return probs

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)

    def coexistence_probability(self, X):
        """P(class 2), the continuous resilience proxy used by the analyses."""
        return self.predict_proba(X)[:, 2]


def save_model(model: MLPSurrogate, path) -> None:
    from ecosweep import __version__

    payload = {}
    for i, (W, b) in enumerate(model.params_):
        payload[f"W{i}"] = W
        payload[f"b{i}"] = b
    payload["scale_lo"] = model.scale_lo_
    payload["scale_hi"] = model.scale_hi_
    meta = dict(model.training_meta_)
    meta["generator"] = f"ecosweep {__version__}"
    meta["format_version"] = MODEL_FORMAT_VERSION
    meta["n_layers"] = len(model.params_)
    meta["n_classes"] = model.n_classes
    payload["meta_json"] = np.array(json.dumps(meta, sort_keys=True))
    np.savez(path, **payload)


def load_model(path) -> MLPSurrogate:
    path = Path(path)
    if not path.exists():
        raise DataError(f"model file {path} does not exist")
    with np.load(path, allow_pickle=False) as blob:
        meta = json.loads(str(blob["meta_json"]))
        if meta.get("format_version") != MODEL_FORMAT_VERSION:
            raise DataError(f"unsupported model format {meta.get('format_version')}")
        params = []
        for i in range(meta["n_layers"]):
            params.append((blob[f"W{i}"].copy(), blob[f"b{i}"].copy()))
        model = MLPSurrogate(
            hidden=tuple(meta["hidden"]), l2=meta["l2"], epochs=meta["epochs"],
            batch_size=meta["batch_size"], lr=meta["lr"],
            train_seed=meta["train_seed"], class_weight=meta["class_weight"],
            n_classes=meta["n_classes"],
        )
        model.params_ = params
        model.scale_lo_ = blob["scale_lo"].copy()
        model.scale_hi_ = blob["scale_hi"].copy()
        model.classes_ = np.arange(meta["n_classes"])
        model.training_meta_ = {k: meta[k] for k in
                                ("epochs", "train_seed", "final_loss", "l2", "lr",
                                 "batch_size", "hidden", "class_weight")}
    return model
