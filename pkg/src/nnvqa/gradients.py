"""Parameter-shift gradients of diagonal-cost expectations.

QAOA parameters are shared by several gates (gamma_j by one ZZ phase per edge,
beta_j by one X rotation per qubit), so each derivative is assembled by the
product rule: every gate occurrence with generator eigenvalues +/-r is shifted
on its own by +/-pi/(4r) and contributes r * (C+ - C-).

Shifted circuits are evaluated in batches: the unshifted circuit is run once,
the state right after every shifted gate is cached, and each shift is realised
as (1 -/+ i G) / sqrt(2) applied to that cached state (G the Pauli string of
the gate) before the rest of the circuit is replayed on the whole batch.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import simulator as sim
from .ansatz import Ansatz, QAOA, check_params, expectation, prepare_state
from .neural import modified_cost_vector
from .problems import MaxCutInstance, build_cost_vector, edge_parities

# Bound on complex amplitudes held by one batch of shifted circuits (~256 MB).
MAX_BATCH_AMPLITUDES = 1 << 24
DEFAULT_FD_STEP = 1e-5


@dataclass(frozen=True)
class Shots:
    """Estimate every expectation from ``n`` fresh measurement samples."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("shot count must be >= 1")


Mode = str | Shots  # "exact" or Shots(n)


def parse_mode(text: str) -> Mode:
    if text == "exact":
        return "exact"
    if text.startswith("shots:"):
        return Shots(int(text.split(":", 1)[1]))
    raise ValueError(f"mode must be 'exact' or 'shots:N', got {text!r}")


def mode_to_str(mode: Mode) -> str:
    return "exact" if mode == "exact" else f"shots:{mode.n}"


@dataclass(frozen=True)
class ShiftEntry:
    param: int
    gate: tuple  # ("edge", layer, edge_index) | ("mixer", layer, qubit) | ("rot", qubit)
    radius: float

    @property
    def shift(self) -> float:
        return np.pi / (4 * self.radius)


def shift_plan(ansatz: Ansatz, instance: MaxCutInstance) -> list[list[ShiftEntry]]:
    """Per parameter, the gate occurrences it drives; zero-weight edges are dropped."""
    n = instance.num_nodes
    if isinstance(ansatz, QAOA):
        plan = []
        for layer in range(ansatz.p):
            plan.append([ShiftEntry(2 * layer, ("edge", layer, e), abs(w))
                         for e, (_, _, w) in enumerate(instance.edges) if w != 0])
            plan.append([ShiftEntry(2 * layer + 1, ("mixer", layer, q), 1.0) for q in range(n)])
        return plan
    return [[ShiftEntry(q, ("rot", q), 0.5)] for q in range(n)]


@dataclass(frozen=True)
class _QaoaTables:
    phase: np.ndarray  # Max-Cut diagonal driving the cost layers
    kicks: np.ndarray  # (2E', 2^N): (1 -/+ i sgn(J) ZZ)/sqrt(2) for nonzero edges, all "+" rows first
    radii: np.ndarray  # (E',)
    flips: np.ndarray  # (N, 2^N) gather indices for X on each qubit


@lru_cache(maxsize=16)
def _qaoa_tables(instance: MaxCutInstance) -> _QaoaTables:
    n = instance.num_nodes
    w = instance.weights
    keep = w != 0
    zz = edge_parities(instance)[keep] * np.sign(w[keep])[:, None]
    kicks = np.concatenate([1 - 1j * zz, 1 + 1j * zz]) / np.sqrt(2)
    flips = sim.flip_index(n, 1 << np.arange(n))
    return _QaoaTables(build_cost_vector(instance), kicks, np.abs(w[keep]), flips)


class _Estimator:
    """Turns a batch of final amplitudes (V, K, 2^N) into V cost estimates."""

    def __init__(self, cost_vector: np.ndarray, mode: Mode, rng: np.random.Generator | None):
        self.cost_vector = np.asarray(cost_vector, dtype=float)
        self.mode = mode
        self.rng = rng
        if mode != "exact" and rng is None:
            raise ValueError("shot-based estimation needs an rng")

    def __call__(self, amps: np.ndarray) -> np.ndarray:
        probs = (amps.real ** 2 + amps.imag ** 2).mean(axis=-2)
        if self.mode == "exact":
            return probs @ self.cost_vector
        probs /= probs.sum(axis=-1, keepdims=True)
        counts = self.rng.multinomial(self.mode.n, probs)
        return counts @ self.cost_vector / self.mode.n


def _chunks(total: int, row_size: int):
    step = max(1, MAX_BATCH_AMPLITUDES // max(1, row_size))
    for start in range(0, total, step):
        yield slice(start, min(total, start + step))


def _qaoa_value_and_grad(instance, p, theta, cost_vector, mode, rng, noise):
    n = instance.num_nodes
    tab = _qaoa_tables(instance)
    est = _Estimator(cost_vector, mode, rng)
    k = 1 if noise is None else noise.trajectories
    masks = None
    if noise is not None and noise.bit_flip_prob > 0:
        masks = sim.draw_flip_masks(n, noise.bit_flip_prob, (p, k), rng)
    gammas, betas = theta[0::2], theta[1::2]
    phases = [np.exp(-1j * g * tab.phase) for g in gammas]
    mixers = [sim.mixer_factors(n, b) for b in betas]

    def mix(a, layer):
        return sim.apply_mixer_factors(a, mixers[layer])

    def noise_layer(a, layer):
        return a if masks is None else sim.apply_flips(a, n, masks[layer])

    # unshifted run, caching the state after each cost layer and each mixer layer
    amps = np.repeat(sim.init_plus(n).amplitudes[None, :], k, axis=0)
    after_phase, after_mixer = [], []
    for layer in range(p):
        amps = amps * phases[layer]
        after_phase.append(amps)
        amps = mix(amps, layer)
        after_mixer.append(amps)
        amps = noise_layer(amps, layer)
    base_amps = amps[None]
    base_probs = (base_amps.real ** 2 + base_amps.imag ** 2).mean(axis=-2)[0]
    value = float(est(base_amps)[0])

    def replay(batch, layer, from_mixer):
        # finish layer `layer` (mixer unless already applied, then noise) and all later layers
        if from_mixer:
            batch = mix(batch, layer)
        batch = noise_layer(batch, layer)
        for later in range(layer + 1, p):
            batch = mix(batch * phases[later], later)
            batch = noise_layer(batch, later)
        return batch

    grad = np.zeros(2 * p)
    n_edges = len(tab.radii)
    for layer in range(p):
        if n_edges:
            vals = np.empty(2 * n_edges)
            for sl in _chunks(2 * n_edges, k << n):
                batch = after_phase[layer][None] * tab.kicks[sl, None, :]
                vals[sl] = est(replay(batch, layer, True))
            grad[2 * layer] = tab.radii @ (vals[:n_edges] - vals[n_edges:])
        phi = after_mixer[layer]
        vals = np.empty(2 * n)
        for sl in _chunks(2 * n, k << n):
            rows = np.arange(2 * n)[sl]
            xphi = phi[:, tab.flips[rows % n]].transpose(1, 0, 2)  # (rows, K, 2^N)
            sign = np.where(rows < n, -1j, 1j)[:, None, None]
            batch = (phi[None] + sign * xphi) / np.sqrt(2)
            vals[sl] = est(replay(batch, layer, False))
        grad[2 * layer + 1] = vals[:n].sum() - vals[n:].sum()
    return value, grad, base_probs


def output_distribution(ansatz: Ansatz, instance: MaxCutInstance, theta,
                        rng: np.random.Generator | None = None,
                        noise: sim.NoiseModel | None = None) -> np.ndarray:
    """Measurement distribution p(x|theta), trajectory-averaged under noise."""
    theta = check_params(ansatz, instance, theta)
    if not isinstance(ansatz, QAOA):
        if noise is not None:
            raise NotImplementedError("bit-flip noise is only defined for the QAOA ansatz")
        return sim.probabilities(prepare_state(ansatz, instance, theta))
    n = instance.num_nodes
    tab = _qaoa_tables(instance)
    k = 1 if noise is None else noise.trajectories
    masks = None if noise is None else sim.draw_flip_masks(n, noise.bit_flip_prob, (ansatz.p, k), rng)
    amps = np.repeat(sim.init_plus(n).amplitudes[None, :], k, axis=0)
    for layer in range(ansatz.p):
        amps = sim.apply_mixer_factors(amps * np.exp(-1j * theta[2 * layer] * tab.phase),
                                       sim.mixer_factors(n, theta[2 * layer + 1]))
        if masks is not None:
            amps = sim.apply_flips(amps, n, masks[layer])
    return (amps.real ** 2 + amps.imag ** 2).mean(axis=0)


def _pauli_on(amps: np.ndarray, n: int, q: int, axis: str) -> np.ndarray:
    b = np.arange(1 << n, dtype=np.int64)
    z = 1.0 - 2.0 * ((b >> q) & 1)
    if axis == "Z":
        return amps * z
    flipped = amps[..., b ^ (1 << q)]
    return flipped if axis == "X" else -1j * z * flipped


def _hea_value_and_grad(ansatz, instance, theta, cost_vector, mode, rng):
    n = instance.num_nodes
    est = _Estimator(cost_vector, mode, rng)
    state = sim.init_ry_quarter(n)
    for q, axis in enumerate(ansatz.axes):
        sim.apply_rotation(state, q, axis, theta[q])
    cz = sim.cz_signs(n, [(q, q + 1) for q in range(n - 1)])
    psi = state.amplitudes
    final = (psi * cz)[None, None]
    value = float(est(final)[0])
    base_probs = np.abs(final[0, 0]) ** 2
    grad = np.zeros(n)
    for q, axis in enumerate(ansatz.axes):
        g = _pauli_on(psi, n, q, axis)
        batch = np.stack([psi - 1j * g, psi + 1j * g]) / np.sqrt(2) * cz
        plus, minus = est(batch[:, None, :])
        grad[q] = 0.5 * (plus - minus)
    return value, grad, base_probs


def value_and_grad(ansatz: Ansatz, instance: MaxCutInstance, cost_vector: np.ndarray, theta,
                   mode: Mode = "exact", rng: np.random.Generator | None = None,
                   noise: sim.NoiseModel | None = None) -> tuple[float, np.ndarray, np.ndarray]:
    """Cost estimate, parameter-shift gradient and output distribution at ``theta``.

    The distribution is the trajectory-averaged one when ``noise`` is given.
    """
    theta = check_params(ansatz, instance, theta)
    cost_vector = np.asarray(cost_vector, dtype=float)
    if cost_vector.shape != (1 << instance.num_nodes,):
        raise ValueError(f"cost vector must have length {1 << instance.num_nodes}")
    if isinstance(ansatz, QAOA):
        return _qaoa_value_and_grad(instance, ansatz.p, theta, cost_vector, mode, rng, noise)
    if noise is not None:
        raise NotImplementedError("bit-flip noise is only defined for the QAOA ansatz")
    return _hea_value_and_grad(ansatz, instance, theta, cost_vector, mode, rng)


def param_shift_grad(ansatz: Ansatz, instance: MaxCutInstance, cost_vector: np.ndarray, theta,
                     mode: Mode = "exact", rng: np.random.Generator | None = None,
                     noise: sim.NoiseModel | None = None) -> np.ndarray:
    return value_and_grad(ansatz, instance, cost_vector, theta, mode, rng, noise)[1]


def modified_grad(ansatz: Ansatz, instance: MaxCutInstance, w: np.ndarray, theta,
                  mode: Mode = "exact", rng: np.random.Generator | None = None,
                  noise: sim.NoiseModel | None = None) -> np.ndarray:
    """Gradient in theta of the W-deformed landscape <psi(theta)| H(W) |psi(theta)>."""
    return param_shift_grad(ansatz, instance, modified_cost_vector(instance, w), theta, mode, rng, noise)


def finite_diff_grad(ansatz: Ansatz, instance: MaxCutInstance, cost_vector: np.ndarray, theta,
                     h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Central differences of exact expectations, one parameter at a time."""
    if h <= 0:
        raise ValueError("step h must be positive")
    theta = check_params(ansatz, instance, theta)
    grad = np.empty_like(theta)
    for j in range(len(theta)):
        e = np.zeros_like(theta)
        e[j] = h
        grad[j] = (expectation(ansatz, instance, theta + e, cost_vector)
                   - expectation(ansatz, instance, theta - e, cost_vector)) / (2 * h)
    return grad
