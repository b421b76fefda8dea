"""Tied-weight tanh autoencoder trained by full-batch gradient descent.

The encoder stacks tanh layers; the decoder reuses the transposed
weights in reverse with its own biases, so a single hidden layer reduces
to h = tanh(Wx + b) and y = tanh(W'h + c). Scoring negates the squared
reconstruction error: queries the network reconstructs well look like
the templates it was trained on.

Gradients are computed analytically by backprop; the test suite checks
them against central finite differences, so the loss/grad path is
exposed as plain functions over a parameter dict.
"""

from __future__ import annotations

import numpy as np

from ..errors import TrainingError
from ._nn import xavier_uniform
from .base import Detector, as_matrix

Params = dict[str, list[np.ndarray]]


def init_params(rng: np.random.Generator, dims: list[int]) -> Params:
    """Xavier-uniform weights, zero biases, for layer widths ``dims``
    (input first, deepest code last)."""
    W = [xavier_uniform(rng, dims[k + 1], dims[k]) for k in range(len(dims) - 1)]
    b = [np.zeros(dims[k + 1]) for k in range(len(dims) - 1)]
    c = [np.zeros(dims[k]) for k in range(len(dims) - 1)]
    return {"W": W, "b": b, "c": c}


def _forward(params: Params, X: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
    W, b, c = params["W"], params["b"], params["c"]
    K = len(W)
    A = [X]
    for k in range(K):
        A.append(np.tanh(A[k] @ W[k].T + b[k]))
    # O[k] is the decoder activation of width dims[k]; O[K] is the code.
    O: list[np.ndarray | None] = [None] * (K + 1)
    O[K] = A[K]
    for k in range(K - 1, -1, -1):
        O[k] = np.tanh(O[k + 1] @ W[k] + c[k])
    return A, O  # type: ignore[return-value]


def reconstruct(params: Params, X: np.ndarray) -> np.ndarray:
    _, O = _forward(params, np.atleast_2d(np.asarray(X, dtype=np.float64)))
    return O[0]


def loss_and_grads(params: Params, X: np.ndarray) -> tuple[float, Params]:
    """Summed squared reconstruction error over the batch and its
    gradients with respect to every parameter tensor."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    W, b, c = params["W"], params["b"], params["c"]
    K = len(W)
    A, O = _forward(params, X)
    Y = O[0]
    loss = float(((X - Y) ** 2).sum())

    grad_W = [np.zeros_like(w) for w in W]
    grad_b = [np.zeros_like(x) for x in b]
    grad_c = [np.zeros_like(x) for x in c]

    g = 2.0 * (Y - X)
    for k in range(K):
        gv = g * (1.0 - O[k] ** 2)
        grad_c[k] = gv.sum(axis=0)
        grad_W[k] += O[k + 1].T @ gv
        g = gv @ W[k].T
    for k in range(K - 1, -1, -1):
        gz = g * (1.0 - A[k + 1] ** 2)
        grad_b[k] = gz.sum(axis=0)
        grad_W[k] += gz.T @ A[k]
        g = gz @ W[k]
    return loss, {"W": grad_W, "b": grad_b, "c": grad_c}


class TiedAutoencoder(Detector):
    """Detector wrapper: init, train for a fixed number of epochs, score.

    epochs=0 leaves the network at its seeded initialization, which makes
    initialization itself testable.
    """

    def __init__(
        self,
        hidden_sizes: tuple[int, ...] = (5, 4, 3),
        learning_rate: float = 0.5,
        epochs: int = 5000,
        seed: int = 0,
    ) -> None:
        if not hidden_sizes:
            raise ValueError("need at least one hidden layer")
        if epochs < 0:
            raise ValueError(f"epochs must be non-negative, got {epochs}")
        self.hidden_sizes = tuple(int(h) for h in hidden_sizes)
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.seed = seed
        self.params_: Params | None = None

    def fit(self, templates: np.ndarray) -> "TiedAutoencoder":
        X = as_matrix(templates)
        dims = [X.shape[1], *self.hidden_sizes]
        rng = np.random.default_rng(self.seed)
        params = init_params(rng, dims)
        lr = self.learning_rate
        for epoch in range(self.epochs):
            loss, grads = loss_and_grads(params, X)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}")
            for name in ("W", "b", "c"):
                for p, g in zip(params[name], grads[name]):
                    p -= lr * g
        self.params_ = params
        return self

    def score(self, query: np.ndarray) -> float:
        if self.params_ is None:
            raise RuntimeError("fit before score")
        q = np.asarray(query, dtype=np.float64).reshape(1, -1)
        y = reconstruct(self.params_, q)
        return float(-((q - y) ** 2).sum())
