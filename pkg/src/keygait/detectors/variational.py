"""Variational autoencoder with a small Gaussian latent space.

Softplus hidden layers on both sides, a diagonal-Gaussian latent
(reparameterized as z = mu + exp(logvar/2) * eps), and a Bernoulli
decoder over the [0, 1] feature vector read out through a sigmoid.
Training minimizes reconstruction cross-entropy plus the KL divergence
to the unit Gaussian with Adam on mini-batches, drawing one noise vector
per example per step.

Scoring is deterministic: the query is pushed through at the latent mean
and scored by the negative reconstruction loss alone. The sampling path
keeps its noise as an explicit argument so gradients can be checked with
frozen draws.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from ..errors import TrainingError
from ._nn import Adam, sigmoid, softplus, xavier_uniform
from .base import Detector, as_matrix

Params = dict[str, Any]


def init_params(
    rng: np.random.Generator,
    d_in: int,
    hidden_sizes: tuple[int, ...],
    latent_dim: int,
) -> Params:
    enc_dims = [d_in, *hidden_sizes]
    dec_dims = [latent_dim, *reversed(hidden_sizes)]
    return {
        "enc_W": [xavier_uniform(rng, enc_dims[i + 1], enc_dims[i]) for i in range(len(hidden_sizes))],
        "enc_b": [np.zeros(h) for h in enc_dims[1:]],
        "W_mu": xavier_uniform(rng, latent_dim, enc_dims[-1]),
        "b_mu": np.zeros(latent_dim),
        "W_lv": xavier_uniform(rng, latent_dim, enc_dims[-1]),
        "b_lv": np.zeros(latent_dim),
        "dec_W": [xavier_uniform(rng, dec_dims[i + 1], dec_dims[i]) for i in range(len(hidden_sizes))],
        "dec_b": [np.zeros(h) for h in dec_dims[1:]],
        "W_out": xavier_uniform(rng, d_in, dec_dims[-1]),
        "b_out": np.zeros(d_in),
    }


def param_list(params: Params) -> list[np.ndarray]:
    """Fixed traversal order; Adam and the finite-difference tests rely
    on getting the same references every time."""
    return [
        *params["enc_W"],
        *params["enc_b"],
        params["W_mu"],
        params["b_mu"],
        params["W_lv"],
        params["b_lv"],
        *params["dec_W"],
        *params["dec_b"],
        params["W_out"],
        params["b_out"],
    ]


def kl_divergence(mu: np.ndarray, logvar: np.ndarray) -> float:
    """KL(N(mu, exp(logvar)) || N(0, I)), summed over all entries."""
    return float(-0.5 * (1.0 + logvar - mu**2 - np.exp(logvar)).sum())


def encode_mean(params: Params, X: np.ndarray) -> np.ndarray:
    h = np.atleast_2d(np.asarray(X, dtype=np.float64))
    for W, b in zip(params["enc_W"], params["enc_b"]):
        h = softplus(h @ W.T + b)
    return h @ params["W_mu"].T + params["b_mu"]


def decode_logits(params: Params, Z: np.ndarray) -> np.ndarray:
    h = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    for W, b in zip(params["dec_W"], params["dec_b"]):
        h = softplus(h @ W.T + b)
    return h @ params["W_out"].T + params["b_out"]


def _bce_from_logits(X: np.ndarray, logits: np.ndarray) -> float:
    # -sum[x log y + (1-x) log(1-y)] written stably in the logits.
    return float((softplus(logits) - X * logits).sum())


def reconstruction_loss(params: Params, X: np.ndarray) -> float:
    """Deterministic reconstruction cross-entropy at the latent mean."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return _bce_from_logits(X, decode_logits(params, encode_mean(params, X)))


def loss_and_grads(
    params: Params, X: np.ndarray, eps: np.ndarray
) -> tuple[float, Params]:
    """ELBO-style loss (reconstruction + KL, summed over the batch) and
    analytic gradients, with the reparameterization noise passed in."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    eps = np.atleast_2d(np.asarray(eps, dtype=np.float64))

    enc_pre: list[np.ndarray] = []
    enc_act: list[np.ndarray] = [X]
    h = X
    for W, b in zip(params["enc_W"], params["enc_b"]):
        v = h @ W.T + b
        enc_pre.append(v)
        h = softplus(v)
        enc_act.append(h)
    mu = h @ params["W_mu"].T + params["b_mu"]
    lv = h @ params["W_lv"].T + params["b_lv"]
    std = np.exp(0.5 * lv)
    Z = mu + std * eps

    dec_pre: list[np.ndarray] = []
    dec_act: list[np.ndarray] = [Z]
    h = Z
    for W, b in zip(params["dec_W"], params["dec_b"]):
        v = h @ W.T + b
        dec_pre.append(v)
        h = softplus(v)
        dec_act.append(h)
    logits = h @ params["W_out"].T + params["b_out"]

    loss = _bce_from_logits(X, logits) + kl_divergence(mu, lv)

    grads: Params = {
        "enc_W": [np.zeros_like(W) for W in params["enc_W"]],
        "enc_b": [np.zeros_like(b) for b in params["enc_b"]],
        "dec_W": [np.zeros_like(W) for W in params["dec_W"]],
        "dec_b": [np.zeros_like(b) for b in params["dec_b"]],
    }

    g = sigmoid(logits) - X  # dloss/dlogits
    grads["W_out"] = g.T @ dec_act[-1]
    grads["b_out"] = g.sum(axis=0)
    g = g @ params["W_out"]
    for k in range(len(params["dec_W"]) - 1, -1, -1):
        g = g * sigmoid(dec_pre[k])  # softplus'
        grads["dec_W"][k] = g.T @ dec_act[k]
        grads["dec_b"][k] = g.sum(axis=0)
        g = g @ params["dec_W"][k]

    g_mu = g + mu  # reconstruction path + KL term
    g_lv = g * eps * 0.5 * std + 0.5 * (np.exp(lv) - 1.0)
    grads["W_mu"] = g_mu.T @ enc_act[-1]
    grads["b_mu"] = g_mu.sum(axis=0)
    grads["W_lv"] = g_lv.T @ enc_act[-1]
    grads["b_lv"] = g_lv.sum(axis=0)

    g = g_mu @ params["W_mu"] + g_lv @ params["W_lv"]
    for k in range(len(params["enc_W"]) - 1, -1, -1):
        g = g * sigmoid(enc_pre[k])
        grads["enc_W"][k] = g.T @ enc_act[k]
        grads["enc_b"][k] = g.sum(axis=0)
        g = g @ params["enc_W"][k]

    return loss, grads


class VariationalAutoencoder(Detector):
    def __init__(
        self,
        hidden_sizes: tuple[int, ...] = (5, 5),
        latent_dim: int = 3,
        learning_rate: float = 0.001,
        batch_size: int = 2,
        epochs: int = 700,
        seed: int = 0,
    ) -> None:
        if not hidden_sizes:
            raise ValueError("need at least one hidden layer")
        if latent_dim < 1:
            raise ValueError(f"latent_dim must be positive, got {latent_dim}")
        if batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {batch_size}")
        if epochs < 0:
            raise ValueError(f"epochs must be non-negative, got {epochs}")
        self.hidden_sizes = tuple(int(h) for h in hidden_sizes)
        self.latent_dim = latent_dim
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed
        self.params_: Params | None = None

    def fit(self, templates: np.ndarray) -> "VariationalAutoencoder":
        X = as_matrix(templates)
        rng = np.random.default_rng(self.seed)
        params = init_params(rng, X.shape[1], self.hidden_sizes, self.latent_dim)
        opt = Adam(param_list(params), learning_rate=self.learning_rate)
        m = X.shape[0]
        for epoch in range(self.epochs):
            order = rng.permutation(m)
            for start in range(0, m, self.batch_size):
                batch = X[order[start : start + self.batch_size]]
                eps = rng.standard_normal((batch.shape[0], self.latent_dim))
                loss, grads = loss_and_grads(params, batch, eps)
                if not np.isfinite(loss):
                    raise TrainingError(f"non-finite loss at epoch {epoch}")
                opt.step(param_list(params), param_list(grads))
        self.params_ = params
        return self

    def score(self, query: np.ndarray) -> float:
        if self.params_ is None:
            raise RuntimeError("fit before score")
        q = np.asarray(query, dtype=np.float64).reshape(1, -1)
        return -reconstruction_loss(self.params_, q)
