"""Small dense networks with hand-written reverse mode, policy heads and Adam.

Everything is float64 numpy. Inputs are ``(batch, features)`` arrays; a
1-D input is treated as a batch of one and the output is squeezed back.
"""

from __future__ import annotations

import math

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)
LOG_STD_MIN, LOG_STD_MAX = -5.0, 2.0


class Mlp:
    """Fully connected net, tanh on hidden layers, identity on the output."""

    def __init__(self, sizes, rng: np.random.Generator | None = None, out_scale: float = 1.0):
        self.sizes = [int(s) for s in sizes]
        if len(self.sizes) < 2 or min(self.sizes) < 1:
            raise ValueError("an Mlp needs at least an input and an output layer")
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for i, (fan_in, fan_out) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            if rng is None:
                w = np.zeros((fan_in, fan_out))
            else:
                bound = 1.0 / math.sqrt(fan_in)
                w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
                if i == len(self.sizes) - 2:
                    w *= out_scale
            self.weights.append(w)
            self.biases.append(np.zeros(fan_out))
        self._cache = None

    @property
    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    @property
    def num_params(self) -> int:
        return sum(i * o + o for i, o in zip(self.sizes[:-1], self.sizes[1:]))

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Forward pass without caching (rollouts, evaluation)."""
        h = np.asarray(x, dtype=np.float64)
        if h.shape[-1] != self.sizes[0]:
            raise ValueError(f"expected {self.sizes[0]} input features, got {h.shape[-1]}")
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = np.tanh(h)
        return h

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        h = x[None, :] if squeeze else x
        if h.shape[1] != self.sizes[0]:
            raise ValueError(f"expected {self.sizes[0]} input features, got {h.shape[1]}")
        acts = [h]
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = np.tanh(h)
            acts.append(h)
        self._cache = (acts, squeeze)
        return h[0] if squeeze else h

    def backward(self, grad_out: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        """Gradients for the last :meth:`forward` call.

        Returns parameter gradients in :attr:`params` order and the gradient
        with respect to the input.
        """
        if self._cache is None:
            raise RuntimeError("backward() called before forward()")
        acts, squeeze = self._cache
        g = np.asarray(grad_out, dtype=np.float64)
        if squeeze:
            g = g[None, :]
        grads: list[np.ndarray] = [None] * (2 * len(self.weights))
        for i in range(len(self.weights) - 1, -1, -1):
            if i < len(self.weights) - 1:
                g = g * (1.0 - acts[i + 1] ** 2)
            grads[2 * i] = acts[i].T @ g
            grads[2 * i + 1] = g.sum(axis=0)
            g = g @ self.weights[i].T
        return grads, (g[0] if squeeze else g)

    def copy(self) -> "Mlp":
        other = Mlp.__new__(Mlp)
        other.sizes = list(self.sizes)
        other.weights = [w.copy() for w in self.weights]
        other.biases = [b.copy() for b in self.biases]
        other._cache = None
        return other

    def load_from(self, other: "Mlp") -> None:
        for dst, src in zip(self.params, other.params):
            dst[...] = src


# ----------------------------------------------------------------------------- categorical

def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    z = np.exp(logits - logits.max(axis=-1, keepdims=True))
    return z / z.sum(axis=-1, keepdims=True)


def categorical_sample(logits: np.ndarray, rng: np.random.Generator) -> tuple[int, float, float]:
    """Inverse-CDF draw from ``softmax(logits)``; returns (action, log-prob, entropy)."""
    logp = log_softmax(np.asarray(logits, dtype=np.float64))
    p = np.exp(logp)
    u = rng.random()
    a = int(np.searchsorted(np.cumsum(p), u * p.sum(), side="right"))
    a = min(a, len(p) - 1)
    return a, float(logp[a]), float(-(p * logp).sum())


def categorical_logprob_entropy(logits: np.ndarray, actions: np.ndarray):
    """Batched log-probs of ``actions`` and entropies, plus the pieces needed for gradients."""
    logp_all = log_softmax(logits)
    p = np.exp(logp_all)
    rows = np.arange(len(actions))
    logp = logp_all[rows, actions]
    ent = -(p * logp_all).sum(axis=1)
    return logp, ent, p, logp_all


def categorical_grads(p, logp_all, actions, d_logp, d_ent) -> np.ndarray:
    """Chain ``dL/dlogp`` and ``dL/dentropy`` (per sample) back to the logits."""
    rows = np.arange(len(actions))
    g = -p * d_logp[:, None]
    g[rows, actions] += d_logp
    ent = -(p * logp_all).sum(axis=1)
    g += d_ent[:, None] * (-p * (logp_all + ent[:, None]))
    return g


# ----------------------------------------------------------------------------- gaussian

def squash_mean(raw: np.ndarray, low: float, high: float) -> np.ndarray:
    return low + (np.tanh(raw) + 1.0) * 0.5 * (high - low)


def gaussian_logprob(x, mean, log_std) -> np.ndarray:
    """Diagonal-Gaussian log density summed over the last axis."""
    std = np.exp(log_std)
    z = (x - mean) / std
    return np.sum(-0.5 * z * z - log_std - 0.5 * LOG_2PI, axis=-1)


def gaussian_entropy(log_std) -> float:
    return float(np.sum(log_std + 0.5 * (LOG_2PI + 1.0)))


def gaussian_sample(mean, log_std, rng: np.random.Generator, low: float, high: float):
    """Draw a power vector; log-prob refers to the raw draw, the action is clipped."""
    mean = np.asarray(mean, dtype=np.float64)
    raw = mean + np.exp(log_std) * rng.standard_normal(mean.shape)
    return np.clip(raw, low, high), raw, float(gaussian_logprob(raw, mean, log_std)), gaussian_entropy(log_std)


# ----------------------------------------------------------------------------- optimiser

class Adam:
    def __init__(self, params: list[np.ndarray], lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: list[np.ndarray]) -> None:
        if len(grads) != len(self.params):
            raise ValueError("gradient list does not match parameter list")
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            if g.shape != p.shape:
                raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
