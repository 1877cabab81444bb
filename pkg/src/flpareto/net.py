"""Two-hidden-layer ReLU perceptron on flat parameter vectors.

Parameters live in a single float vector so protection mechanisms and
federated averaging can treat the model as plain numbers.  Gradients are
hand-derived (softmax cross-entropy) and are checked against finite
differences in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ModelSpec", "init_params", "loss_and_grad", "predict", "accuracy"]


@dataclass(frozen=True)
class ModelSpec:
    in_dim: int
    hidden1: int = 32
    hidden2: int = 32
    n_classes: int = 2

    def __post_init__(self):
        if min(self.in_dim, self.hidden1, self.hidden2, self.n_classes) < 1:
            raise ValueError("all layer widths must be >= 1")

    @property
    def shapes(self) -> list[tuple[int, ...]]:
        return [
            (self.in_dim, self.hidden1),
            (self.hidden1,),
            (self.hidden1, self.hidden2),
            (self.hidden2,),
            (self.hidden2, self.n_classes),
            (self.n_classes,),
        ]

    @property
    def n_params(self) -> int:
        return sum(int(np.prod(s)) for s in self.shapes)

    def weight_mask(self) -> np.ndarray:
        """True at weight-matrix entries, False at biases."""
        mask = []
        for s in self.shapes:
            mask.append(np.full(int(np.prod(s)), len(s) == 2))
        return np.concatenate(mask)

    def unpack(self, params: np.ndarray) -> list[np.ndarray]:
        out, off = [], 0
        for s in self.shapes:
            size = int(np.prod(s))
            out.append(params[off : off + size].reshape(s))
            off += size
        return out


def init_params(spec: ModelSpec, rng: np.random.Generator) -> np.ndarray:
    """fan-in-scaled normal weights, zero biases, as one flat vector."""
    parts = []
    for s in spec.shapes:
        if len(s) == 2:
            parts.append(rng.normal(0.0, 1.0 / np.sqrt(s[0]), size=s).ravel())
        else:
            parts.append(np.zeros(s))
    return np.concatenate(parts)


def _forward(params: np.ndarray, X: np.ndarray, spec: ModelSpec):
    W1, b1, W2, b2, W3, b3 = spec.unpack(params)
    a1 = np.maximum(X @ W1 + b1, 0.0)
    a2 = np.maximum(a1 @ W2 + b2, 0.0)
    logits = a2 @ W3 + b3
    return logits, (a1, a2)


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=1, keepdims=True))


def loss_and_grad(
    params: np.ndarray, X: np.ndarray, y: np.ndarray, spec: ModelSpec
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and its gradient as a flat vector."""
    W1, b1, W2, b2, W3, b3 = spec.unpack(params)
    logits, (a1, a2) = _forward(params, X, spec)
    n = X.shape[0]
    logp = _log_softmax(logits)
    loss = float(-np.mean(logp[np.arange(n), y]))
    dlogits = np.exp(logp)
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    gW3 = a2.T @ dlogits
    gb3 = dlogits.sum(axis=0)
    da2 = dlogits @ W3.T
    da2[a2 <= 0.0] = 0.0
    gW2 = a1.T @ da2
    gb2 = da2.sum(axis=0)
    da1 = da2 @ W2.T
    da1[a1 <= 0.0] = 0.0
    gW1 = X.T @ da1
    gb1 = da1.sum(axis=0)
    grad = np.concatenate(
        [gW1.ravel(), gb1, gW2.ravel(), gb2, gW3.ravel(), gb3]
    )
    return loss, grad


def predict(params: np.ndarray, X: np.ndarray, spec: ModelSpec) -> np.ndarray:
    logits, _ = _forward(params, X, spec)
    return np.argmax(logits, axis=1)


def accuracy(params: np.ndarray, X: np.ndarray, y: np.ndarray, spec: ModelSpec) -> float:
    return float(np.mean(predict(params, X, spec) == y))
