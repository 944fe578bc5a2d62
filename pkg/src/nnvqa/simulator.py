"""Dense statevector simulation: gate kernels, sampling, and bit-flip trajectories.

Conventions:
  * basis index ``b`` holds the bit of qubit ``q`` at binary position ``q``;
  * rotations are R_A(theta) = exp(-i theta sigma_A / 2), so the QAOA mixer
    exp(-i beta sigma_x) is R_X(2 beta) on every qubit;
  * a measured bit 0 is spin +1 and bit 1 is spin -1.

Kernels act on the last axis of an amplitude array and accept arbitrary
leading (batch) axes, which the gradient engine uses to evaluate many
shifted circuits or noise trajectories at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

MAX_QUBITS = 24


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 stream; numpy guarantees the same sequence on every platform for a given seed."""
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(*keys: int) -> int:
    """Deterministic 64-bit child seed from a tuple of nonnegative integers."""
    return int(np.random.SeedSequence(list(keys)).generate_state(1, dtype=np.uint64)[0])


@dataclass
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}], got {self.num_qubits}")
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.num_qubits,):
            raise ValueError(f"expected {1 << self.num_qubits} amplitudes, got shape {self.amplitudes.shape}")

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


@dataclass(frozen=True)
class NoiseModel:
    """Independent bit flips on every qubit after each QAOA (cost, mixer) layer, including the last."""

    bit_flip_prob: float
    trajectories: int = 100

    def __post_init__(self):
        if not 0.0 <= self.bit_flip_prob <= 1.0:
            raise ValueError("bit_flip_prob must lie in [0, 1]")
        if self.trajectories < 1:
            raise ValueError("trajectories must be >= 1")


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"number of qubits must be in [1, {MAX_QUBITS}], got {n}")


def init_plus(n: int) -> StateVector:
    _check_n(n)
    return StateVector(n, np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128))


def product_state(single: np.ndarray, n: int) -> np.ndarray:
    """Tensor power of a single-qubit state (qubit 0 least significant)."""
    return reduce(np.kron, [np.asarray(single, dtype=np.complex128)] * n)


def init_ry_quarter(n: int) -> StateVector:
    _check_n(n)
    single = np.array([np.cos(np.pi / 8), np.sin(np.pi / 8)])
    return StateVector(n, product_state(single, n))


# ---------------------------------------------------------------------------
# array kernels (last axis = amplitudes)


def _split(amps: np.ndarray, n: int, qubit: int) -> np.ndarray:
    """View with shape (batch, high, 2, low) so that axis 2 is ``qubit``."""
    return amps.reshape(-1, 1 << (n - qubit - 1), 2, 1 << qubit)


def rotate(amps: np.ndarray, n: int, qubit: int, axis: str, theta) -> None:
    """In-place R_axis(theta) on ``qubit``.

    ``theta`` is a scalar or holds one angle per row once the leading axes are flattened.
    """
    if not amps.flags.c_contiguous:
        raise ValueError("amplitude array must be C-contiguous for in-place kernels")
    v = _split(amps, n, qubit)
    theta = np.asarray(theta, dtype=float)
    if theta.ndim:
        theta = theta.reshape(-1, 1, 1)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    a0 = v[:, :, 0, :]
    a1 = v[:, :, 1, :]
    if axis == "Z":
        a0 *= c - 1j * s
        a1 *= c + 1j * s
        return
    t0 = a0.copy()
    if axis == "X":
        a0 *= c
        a0 -= 1j * s * a1
        a1 *= c
        a1 -= 1j * s * t0
    elif axis == "Y":
        a0 *= c
        a0 -= s * a1
        a1 *= c
        a1 += s * t0
    else:
        raise ValueError(f"unknown rotation axis {axis!r}")


def mixer_kernels(amps: np.ndarray, n: int, beta) -> None:
    for q in range(n):
        rotate(amps, n, q, "X", 2 * np.asarray(beta))


@lru_cache(maxsize=32)
def _hamming_table(n: int) -> np.ndarray:
    b = np.arange(1 << n)
    x = b[:, None] ^ b[None, :]
    return ((x[..., None] >> np.arange(n)) & 1).sum(axis=-1)


def mixer_operator(n: int, beta: float) -> np.ndarray:
    """Dense exp(-i beta sum_q X_q); used by the batched engine for small n only.

    Entry (a, b) of the tensor power of R_X(2 beta) is cos^(n-d) (-i sin)^d with d = popcount(a ^ b).
    """
    c, s = np.cos(beta), np.sin(beta)
    d = np.arange(n + 1)
    return (c ** (n - d) * (-1j * s) ** d)[_hamming_table(n)]


def mixer_factors(n: int, beta: float, block: int = 8) -> list[tuple[int, np.ndarray]]:
    """Dense tensor factors of exp(-i beta sum_q X_q) over groups of at most ``block`` qubits."""
    return [(start, mixer_operator(min(block, n - start), beta)) for start in range(0, n, block)]


def apply_mixer_factors(amps: np.ndarray, factors: list[tuple[int, np.ndarray]]) -> np.ndarray:
    """Apply the factors from :func:`mixer_factors` to the last axis; returns a new array.

    Each factor is a 2^block square matrix, so this trades a little memory for far
    fewer passes over the amplitudes than per-qubit kernels.
    """
    shape = amps.shape
    out = amps
    for start, op in factors:
        if start == 0:
            out = out.reshape(-1, len(op)) @ op  # op is symmetric
        else:
            out = np.matmul(op, out.reshape(-1, len(op), 1 << start))
    return out.reshape(shape)


def flip_index(n: int, masks: np.ndarray) -> np.ndarray:
    """Gather indices realising X on the set bits of each mask: out[..., b] = in[..., b ^ mask]."""
    return np.bitwise_xor(np.arange(1 << n, dtype=np.int64)[None, :], np.asarray(masks, dtype=np.int64)[:, None])


def apply_flips(amps: np.ndarray, n: int, masks: np.ndarray) -> np.ndarray:
    """Apply one flip mask per trajectory; ``amps`` has shape (..., K, 2^n) and masks shape (K,)."""
    idx = flip_index(n, masks)
    return np.take_along_axis(amps, np.broadcast_to(idx, amps.shape), axis=-1)


def draw_flip_masks(n: int, q: float, shape, rng: np.random.Generator) -> np.ndarray:
    """Integer masks whose bits are set independently with probability q."""
    flips = rng.random((*np.atleast_1d(shape), n)) < q
    return (flips.astype(np.int64) << np.arange(n, dtype=np.int64)).sum(axis=-1)


# ---------------------------------------------------------------------------
# StateVector operations


def apply_diagonal_phase(state: StateVector, cost_vector: np.ndarray, gamma: float) -> StateVector:
    cost_vector = np.asarray(cost_vector)
    if cost_vector.shape != state.amplitudes.shape:
        raise ValueError(f"cost vector length {cost_vector.shape} does not match state {state.amplitudes.shape}")
    state.amplitudes *= np.exp(-1j * gamma * cost_vector)
    return state


def apply_rotation(state: StateVector, qubit: int, axis: str, theta: float) -> StateVector:
    if not 0 <= qubit < state.num_qubits:
        raise ValueError(f"qubit {qubit} out of range for {state.num_qubits} qubits")
    rotate(state.amplitudes, state.num_qubits, qubit, axis.upper(), theta)
    return state


def cz_signs(n: int, pairs) -> np.ndarray:
    b = np.arange(1 << n, dtype=np.int64)
    signs = np.ones(1 << n)
    for i, j in pairs:
        signs[((b >> i) & (b >> j) & 1) == 1] *= -1
    return signs


def apply_cz(state: StateVector, i: int, j: int) -> StateVector:
    n = state.num_qubits
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"invalid CZ qubits ({i}, {j}) for {n} qubits")
    b = np.arange(1 << n, dtype=np.int64)
    state.amplitudes[((b >> i) & (b >> j) & 1) == 1] *= -1
    return state


def apply_mixer(state: StateVector, beta: float) -> StateVector:
    mixer_kernels(state.amplitudes, state.num_qubits, beta)
    return state


def probabilities(state: StateVector) -> np.ndarray:
    a = state.amplitudes
    return a.real ** 2 + a.imag ** 2


def sample_indices(probs: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    return np.searchsorted(cdf, rng.random(n), side="right").clip(max=len(probs) - 1)


def spins_of_indices(indices: np.ndarray, n: int) -> np.ndarray:
    bits = (np.asarray(indices, dtype=np.int64)[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return (1 - 2 * bits).astype(np.int8)


def sample_spins(state: StateVector, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. measurement outcomes as rows of +/-1 spins."""
    if n < 1:
        raise ValueError("need at least one sample")
    return spins_of_indices(sample_indices(probabilities(state), n, rng), state.num_qubits)


def expectation_diagonal(state: StateVector, cost_vector: np.ndarray) -> float:
    cost_vector = np.asarray(cost_vector)
    if cost_vector.shape != state.amplitudes.shape:
        raise ValueError(f"cost vector length {cost_vector.shape} does not match state {state.amplitudes.shape}")
    return float(probabilities(state) @ cost_vector)


def run_noisy_expectation(ansatz, instance, theta, cost_vector, noise: NoiseModel, rng: np.random.Generator) -> float:
    """Trajectory average of the diagonal expectation for a QAOA circuit with bit-flip noise.

    Each of the K trajectories flips every qubit independently with probability
    q after each (cost, mixer) layer. All trajectories are simulated as one batch.
    """
    from .ansatz import QAOA
    from .problems import build_cost_vector

    if not isinstance(ansatz, QAOA):
        raise NotImplementedError("bit-flip noise is only defined for the QAOA ansatz")
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (ansatz.num_params(instance.num_nodes),):
        raise ValueError("parameter vector length does not match the ansatz")
    n = instance.num_nodes
    phase = build_cost_vector(instance)
    k = noise.trajectories
    masks = draw_flip_masks(n, noise.bit_flip_prob, (ansatz.p, k), rng)
    amps = np.repeat(init_plus(n).amplitudes[None, :], k, axis=0)
    for layer in range(ansatz.p):
        gamma, beta = theta[2 * layer], theta[2 * layer + 1]
        amps *= np.exp(-1j * gamma * phase)
        mixer_kernels(amps, n, beta)
        if noise.bit_flip_prob > 0:
            amps = apply_flips(amps, n, masks[layer])
    probs = amps.real ** 2 + amps.imag ** 2
    return float((probs @ np.asarray(cost_vector)).mean())
