"""Parameterized circuit families: QAOA with an X mixer, and a single-block hardware-efficient ansatz."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import simulator as sim
from .problems import MaxCutInstance, build_cost_vector


@dataclass(frozen=True)
class QAOA:
    p: int

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("QAOA depth p must be >= 1")

    def num_params(self, n: int) -> int:
        return 2 * self.p

    def to_dict(self) -> dict:
        return {"type": "qaoa", "p": self.p}


@dataclass(frozen=True)
class HardwareEfficient:
    """R_Y(pi/4) layer on |0...0>, one parameterized rotation per qubit, then an open CZ chain."""

    axes: str

    def __post_init__(self):
        object.__setattr__(self, "axes", self.axes.upper())
        if not self.axes or set(self.axes) - set("XYZ"):
            raise ValueError("axes must be a nonempty string over {X, Y, Z}")

    def num_params(self, n: int) -> int:
        return n

    def to_dict(self) -> dict:
        return {"type": "hea", "axes": self.axes}

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "HardwareEfficient":
        return cls("".join(rng.choice(list("XYZ"), size=n)))


Ansatz = QAOA | HardwareEfficient


def ansatz_from_dict(doc: dict) -> Ansatz:
    kind = doc.get("type")
    if kind == "qaoa":
        return QAOA(int(doc["p"]))
    if kind == "hea":
        return HardwareEfficient(str(doc["axes"]))
    raise ValueError(f"unknown ansatz type {kind!r}")


def num_params(ansatz: Ansatz, n: int) -> int:
    return ansatz.num_params(n)


def random_init(ansatz: Ansatz, n: int, rng: np.random.Generator) -> np.ndarray:
    """Parameters drawn i.i.d. uniform on [0, 2*pi)."""
    return rng.uniform(0.0, 2 * np.pi, size=ansatz.num_params(n))


def check_params(ansatz: Ansatz, instance: MaxCutInstance, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    expected = ansatz.num_params(instance.num_nodes)
    if theta.shape != (expected,):
        raise ValueError(f"expected {expected} parameters, got shape {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("parameters must be finite")
    if isinstance(ansatz, HardwareEfficient) and len(ansatz.axes) != instance.num_nodes:
        raise ValueError(f"ansatz has {len(ansatz.axes)} axes for {instance.num_nodes} qubits")
    return theta


def prepare_state(ansatz: Ansatz, instance: MaxCutInstance, theta, phase_vector: np.ndarray | None = None) -> sim.StateVector:
    """Output state of the circuit.

    ``phase_vector`` is the Max-Cut diagonal driving the QAOA cost layers; pass it
    to skip rebuilding it on every call.
    """
    theta = check_params(ansatz, instance, theta)
    n = instance.num_nodes
    if isinstance(ansatz, QAOA):
        phase = build_cost_vector(instance) if phase_vector is None else phase_vector
        state = sim.init_plus(n)
        for layer in range(ansatz.p):
            sim.apply_diagonal_phase(state, phase, theta[2 * layer])
            sim.apply_mixer(state, theta[2 * layer + 1])
        return state
    state = sim.init_ry_quarter(n)
    for q, axis in enumerate(ansatz.axes):
        sim.apply_rotation(state, q, axis, theta[q])
    for q in range(n - 1):
        sim.apply_cz(state, q, q + 1)
    return state


def expectation(ansatz: Ansatz, instance: MaxCutInstance, theta, cost_vector: np.ndarray,
                noise: sim.NoiseModel | None = None, rng: np.random.Generator | None = None) -> float:
    """Exact diagonal expectation, or the trajectory estimate when a noise model is given."""
    if noise is not None:
        if rng is None:
            raise ValueError("noisy expectation needs an rng")
        return sim.run_noisy_expectation(ansatz, instance, theta, cost_vector, noise, rng)
    return sim.expectation_diagonal(prepare_state(ansatz, instance, theta), cost_vector)
