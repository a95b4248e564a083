"""Single-hidden-layer ReLU MLP baseline trained by plain SGD.

The fixed-bias variant freezes the hidden biases at their random initial
values (gradients masked), which mirrors a lattice whose segment boundaries
cannot move.  Batch scheduling reuses the lattice trainer's scheduler so the
same (seed, N, B) produces the same batch sequence for both models.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .training import Dataset, batch_schedule

__all__ = ["MlpParams", "init_mlp", "mlp_forward", "mlp_grad", "mlp_train"]


@dataclass
class MlpParams:
    W1: np.ndarray  # (h, d)
    b1: np.ndarray  # (h,)
    W2: np.ndarray  # (m, h)
    b2: np.ndarray  # (m,)
    bias_trainable: bool = True

    def __post_init__(self):
        h, d = self.W1.shape
        m = self.W2.shape[0]
        if self.b1.shape != (h,) or self.W2.shape != (m, h) or self.b2.shape != (m,):
            raise ValueError("inconsistent MLP shapes")
        for arr in (self.W1, self.b1, self.W2, self.b2):
            if not np.isfinite(arr).all():
                raise ValueError("parameters must be finite")

    @property
    def hidden(self) -> int:
        return self.W1.shape[0]

    def copy(self) -> "MlpParams":
        return MlpParams(self.W1.copy(), self.b1.copy(), self.W2.copy(),
                         self.b2.copy(), self.bias_trainable)


def init_mlp(d: int, m: int, hidden: int, seed: int,
             bias_trainable: bool = True) -> MlpParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization."""
    rng = np.random.default_rng(seed)
    s1 = 1.0 / np.sqrt(d)
    s2 = 1.0 / np.sqrt(hidden)
    return MlpParams(
        W1=rng.uniform(-s1, s1, size=(hidden, d)),
        b1=rng.uniform(-s1, s1, size=hidden),
        W2=rng.uniform(-s2, s2, size=(m, hidden)),
        b2=rng.uniform(-s2, s2, size=m),
        bias_trainable=bias_trainable,
    )


def mlp_forward(params: MlpParams, inputs) -> np.ndarray:
    """W2 relu(W1 u + b1) + b2 for a batch of inputs; returns (n, m)."""
    u = np.atleast_2d(np.asarray(inputs, dtype=float))
    hidden = np.maximum(u @ params.W1.T + params.b1, 0.0)
    return hidden @ params.W2.T + params.b2


def mlp_grad(params: MlpParams, inputs, targets) -> MlpParams:
    """Gradients of the batch mean-squared loss; frozen biases get zeros."""
    u = np.atleast_2d(np.asarray(inputs, dtype=float))
    y = np.asarray(targets, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    n = u.shape[0]
    pre = u @ params.W1.T + params.b1
    hidden = np.maximum(pre, 0.0)
    out = hidden @ params.W2.T + params.b2
    d_out = 2.0 * (out - y) / n                     # (n, m)
    g_w2 = d_out.T @ hidden
    g_b2 = d_out.sum(axis=0)
    d_hidden = (d_out @ params.W2) * (pre > 0)      # (n, h)
    g_w1 = d_hidden.T @ u
    g_b1 = d_hidden.sum(axis=0)
    if not params.bias_trainable:
        g_b1 = np.zeros_like(g_b1)
    return MlpParams(g_w1, g_b1, g_w2, g_b2, params.bias_trainable)


def mlp_train(params: MlpParams, dataset: Dataset, lr: float, epochs: int,
              batch_size: int, seed: int) -> tuple[MlpParams, np.ndarray, bool]:
    """SGD with the shared batch scheduler; returns (params, loss trace, diverged).

    A run is flagged as diverged (and stopped) when the full-data loss exceeds
    1e6 times its initial value.
    """
    if lr < 0:
        raise ValueError("lr must be >= 0")
    params = params.copy()
    batches = batch_schedule(dataset.n, batch_size, np.random.default_rng(seed))
    trace = np.empty(epochs)

    def full_loss(p: MlpParams) -> float:
        r = mlp_forward(p, dataset.inputs) - dataset.targets
        return float(np.sum(r * r) / dataset.n)

    limit = 1e6 * max(full_loss(params), 1e-300)
    diverged = False
    for epoch in range(epochs):
        idx = next(batches)
        g = mlp_grad(params, dataset.inputs[idx], dataset.targets[idx])
        params.W1 -= lr * g.W1
        params.b1 -= lr * g.b1
        params.W2 -= lr * g.W2
        params.b2 -= lr * g.b2
        trace[epoch] = full_loss(params)
        if not np.isfinite(trace[epoch]) or trace[epoch] > limit:
            diverged = True
            trace[epoch:] = trace[epoch] if np.isfinite(trace[epoch]) else np.inf
            break
    return params, trace, diverged
