"""Minimal deterministic ReLU MLP regression (numpy, Adam, MSE).

Kept free of autodiff frameworks so that a fixed seed yields bit-identical
weights across runs, which the export contract requires.
"""

from __future__ import annotations

import numpy as np

__all__ = ["init_layers", "forward_batch", "train_mlp"]


def init_layers(rng: np.random.Generator, dims: list[int]):
    """He-initialized [(W, b, activation), ...] with a linear final layer."""
    layers = []
    for i in range(1, len(dims)):
        w = rng.normal(0.0, np.sqrt(2.0 / dims[i - 1]), (dims[i], dims[i - 1]))
        b = np.zeros(dims[i])
        act = "relu" if i < len(dims) - 1 else "linear"
        layers.append([w, b, act])
    return layers


def forward_batch(layers, x: np.ndarray) -> np.ndarray:
    h = x
    for w, b, act in layers:
        h = h @ w.T + b
        if act == "relu":
            h = np.maximum(h, 0.0)
    return h


def _forward_cached(layers, x):
    acts = [x]
    h = x
    for w, b, act in layers:
        h = h @ w.T + b
        if act == "relu":
            h = np.maximum(h, 0.0)
        acts.append(h)
    return acts


def _backward(layers, acts, grad_out):
    grads = []
    g = grad_out
    for i in range(len(layers) - 1, -1, -1):
        w, _, act = layers[i]
        if act == "relu":
            g = g * (acts[i + 1] > 0.0)
        grads.append((g.T @ acts[i], g.sum(axis=0)))
        g = g @ w
    grads.reverse()
    return grads


def train_mlp(layers, x: np.ndarray, y: np.ndarray, epochs: int,
              rng: np.random.Generator, lr: float = 1e-3,
              batch_size: int = 64, weight_decay: float = 1e-4) -> list[float]:
    """Adam on mean-squared error with decoupled weight decay; returns
    per-epoch training losses.  The decay keeps weight magnitudes small,
    which downstream linear-relaxation verifiers depend on for tight
    bounds."""
    m = [(np.zeros_like(w), np.zeros_like(b)) for w, b, _ in layers]
    v = [(np.zeros_like(w), np.zeros_like(b)) for w, b, _ in layers]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0
    losses = []
    n = x.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            xb, yb = x[idx], y[idx]
            acts = _forward_cached(layers, xb)
            err = acts[-1] - yb
            epoch_loss += float(np.sum(err * err))
            grads = _backward(layers, acts, 2.0 * err / xb.shape[0])
            step += 1
            for i, (gw, gb) in enumerate(grads):
                mw, mb = m[i]
                vw, vb = v[i]
                mw[:] = beta1 * mw + (1 - beta1) * gw
                mb[:] = beta1 * mb + (1 - beta1) * gb
                vw[:] = beta2 * vw + (1 - beta2) * gw * gw
                vb[:] = beta2 * vb + (1 - beta2) * gb * gb
                corr1 = 1 - beta1**step
                corr2 = 1 - beta2**step
                layers[i][0] -= lr * (
                    (mw / corr1) / (np.sqrt(vw / corr2) + eps)
                    + weight_decay * layers[i][0]
                )
                layers[i][1] -= lr * (mb / corr1) / (np.sqrt(vb / corr2) + eps)
        losses.append(epoch_loss / n)
    return losses
