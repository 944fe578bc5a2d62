import itertools
from functools import reduce

import numpy as np
import pytest

from nnvqa.problems import MaxCutInstance, gen_fully_connected, gen_k_regular_bimodal

I2 = np.eye(2, dtype=complex)
PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def op_on(n, qubit, single):
    """Dense 2^n operator acting with ``single`` on ``qubit`` (qubit 0 = least significant bit)."""
    return reduce(np.kron, [single if q == qubit else I2 for q in reversed(range(n))])


def dense_cost(instance):
    """Diagonal Ising cost by explicit Z_i Z_j matrices."""
    n = instance.num_nodes
    h = np.zeros((1 << n, 1 << n), dtype=complex)
    for i, j, w in instance.edges:
        h += w * op_on(n, i, PAULI["Z"]) @ op_on(n, j, PAULI["Z"])
    return h


def enumerate_spins(n):
    """All spin vectors in index order, spin of qubit q from bit q (0 -> +1)."""
    return [np.array([1 - 2 * ((b >> q) & 1) for q in range(n)]) for b in range(1 << n)]


@pytest.fixture
def instance_a():
    return gen_fully_connected(5, 0.0, 1.0, seed=7)


@pytest.fixture
def instance_b():
    return gen_k_regular_bimodal(8, 5, 1.0, 0.3, seed=11)


@pytest.fixture
def triangle():
    return MaxCutInstance(3, ((0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)))


def random_instance(rng, n, density=1.0):
    edges = [(i, j, float(rng.normal())) for i, j in itertools.combinations(range(n), 2) if rng.random() < density]
    if not edges:
        edges = [(0, 1, 1.0)]
    return MaxCutInstance(n, tuple(edges))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
