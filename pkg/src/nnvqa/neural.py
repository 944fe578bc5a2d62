"""Single-layer post-processing network y = tanh(W x) and the landscape it induces.

Everything here works on spin vectors in {-1, +1}^N; batched inputs are rows.
"""

from __future__ import annotations

import numpy as np

from .problems import MAX_NODES, MaxCutInstance, basis_spins


def _check_square(instance: MaxCutInstance, w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    n = instance.num_nodes
    if w.shape != (n, n):
        raise ValueError(f"weight matrix must be {n}x{n}, got {w.shape}")
    return w


def forward(w: np.ndarray, x: np.ndarray) -> np.ndarray:
    """tanh(W x) for one spin vector or for each row of a batch."""
    w = np.asarray(w, dtype=float)
    x = np.asarray(x, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1] or x.shape[-1] != w.shape[1]:
        raise ValueError(f"shape mismatch: W {w.shape}, x {x.shape}")
    return np.tanh(x @ w.T)


def relaxed_cost(instance: MaxCutInstance, y: np.ndarray) -> np.ndarray | float:
    """sum over edges of J_ij y_i y_j; vectorized over leading axes of ``y``."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != instance.num_nodes:
        raise ValueError(f"expected vectors of length {instance.num_nodes}, got {y.shape}")
    total = np.zeros(y.shape[:-1])
    for i, j, w in instance.edges:
        total = total + w * y[..., i] * y[..., j]
    return float(total) if total.ndim == 0 else total


def _output_error(instance: MaxCutInstance, y: np.ndarray) -> np.ndarray:
    # d cost / d (W x)_i = (J_sym y)_i * (1 - y_i^2)
    return (y @ instance.adjacency()) * (1.0 - y * y)


def grad_w(instance: MaxCutInstance, w: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Gradient of relaxed_cost(forward(W, x)) with respect to W, by backpropagation."""
    w = _check_square(instance, w)
    x = np.asarray(x, dtype=float)
    if x.shape != (instance.num_nodes,):
        raise ValueError(f"x must have length {instance.num_nodes}")
    y = forward(w, x)
    return np.outer(_output_error(instance, y), x)


def weighted_grad(instance: MaxCutInstance, w: np.ndarray, xs: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """sum_b weights[b] * grad_w(W, xs[b]) computed as one matrix product."""
    w = _check_square(instance, w)
    xs = np.asarray(xs, dtype=float)
    delta = _output_error(instance, forward(w, xs))
    return (delta * np.asarray(weights, dtype=float)[:, None]).T @ xs


def batch_grad(instance: MaxCutInstance, w: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Mean per-sample gradient over a batch of measured spin vectors."""
    xs = np.asarray(xs)
    if xs.ndim != 2 or len(xs) == 0:
        raise ValueError("batch must be a nonempty 2-D array of spin vectors")
    return weighted_grad(instance, w, xs, np.full(len(xs), 1.0 / len(xs)))


def exact_grad(instance: MaxCutInstance, w: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Gradient of sum_x p(x) C(f_W(x)) by enumerating every basis state."""
    return weighted_grad(instance, w, basis_spins(instance.num_nodes), probs)


def modified_cost_vector(instance: MaxCutInstance, w: np.ndarray) -> np.ndarray:
    """Diagonal of H(W): entry b is the relaxed cost of tanh(W x(b))."""
    if instance.num_nodes > MAX_NODES:
        raise ValueError(f"num_nodes={instance.num_nodes} exceeds the dense limit of {MAX_NODES}")
    w = _check_square(instance, w)
    return relaxed_cost(instance, forward(w, basis_spins(instance.num_nodes)))


def reg_value(w: np.ndarray) -> float:
    """L1 distance of W from the identity, sum_ij |w_ij - delta_ij|."""
    w = np.asarray(w, dtype=float)
    return float(np.abs(w - np.eye(len(w))).sum())


def reg_subgrad(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    return np.sign(w - np.eye(len(w)))
