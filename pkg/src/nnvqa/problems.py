"""Max-Cut instances, their diagonal Ising cost, and seeded instance generators.

Basis index ``b`` stores the bit of qubit ``i`` at binary position ``i``; bit 0
maps to spin +1 and bit 1 to spin -1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Sequence

import numpy as np

MAX_NODES = 24


class InstanceFormatError(ValueError):
    """Raised when an instance document fails validation; ``field`` names the culprit."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


@dataclass(frozen=True)
class MaxCutInstance:
    num_nodes: int
    edges: tuple[tuple[int, int, float], ...]
    family: str | None = None
    seed: int | None = None
    params: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not isinstance(self.num_nodes, (int, np.integer)) or self.num_nodes < 1:
            raise InstanceFormatError("num_nodes", "must be a positive integer")
        norm = []
        seen = set()
        for k, edge in enumerate(self.edges):
            if len(edge) != 3:
                raise InstanceFormatError(f"edges[{k}]", "expected [i, j, weight]")
            i, j, w = edge
            if not (float(i).is_integer() and float(j).is_integer()):
                raise InstanceFormatError(f"edges[{k}]", "node indices must be integers")
            i, j, w = int(i), int(j), float(w)
            if i == j:
                raise InstanceFormatError(f"edges[{k}]", f"self-loop on node {i}")
            if not (0 <= i < self.num_nodes and 0 <= j < self.num_nodes):
                raise InstanceFormatError(f"edges[{k}]", f"node index out of range [0, {self.num_nodes})")
            if not math.isfinite(w):
                raise InstanceFormatError(f"edges[{k}]", "weight must be finite")
            if i > j:
                i, j = j, i
            if (i, j) in seen:
                raise InstanceFormatError(f"edges[{k}]", f"duplicate edge ({i}, {j})")
            seen.add((i, j))
            norm.append((i, j, w))
        object.__setattr__(self, "num_nodes", int(self.num_nodes))
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, _, w in self.edges], dtype=float)

    @property
    def instance_id(self) -> str:
        if self.family is not None and self.seed is not None:
            return f"{self.family}-n{self.num_nodes}-s{self.seed}"
        return f"graph-n{self.num_nodes}-e{self.num_edges}"

    def adjacency(self) -> np.ndarray:
        """Symmetrized weight matrix (J_ij = J_ji on edges, zero elsewhere)."""
        a = np.zeros((self.num_nodes, self.num_nodes))
        for i, j, w in self.edges:
            a[i, j] = a[j, i] = w
        return a

    def is_connected(self) -> bool:
        n = self.num_nodes
        nbrs = [[] for _ in range(n)]
        for i, j, _ in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        seen = {0}
        stack = [0]
        while stack:
            for v in nbrs[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == n

    def to_dict(self) -> dict:
        return {
            "num_nodes": self.num_nodes,
            "edges": [[i, j, w] for i, j, w in self.edges],
            "family": self.family,
            "seed": self.seed,
            "params": dict(self.params),
        }

    @classmethod
    def from_dict(cls, doc: Any) -> "MaxCutInstance":
        if not isinstance(doc, dict):
            raise InstanceFormatError("<root>", "expected a JSON object")
        for key in ("num_nodes", "edges"):
            if key not in doc:
                raise InstanceFormatError(key, "missing required field")
        n = doc["num_nodes"]
        if isinstance(n, bool) or not isinstance(n, int):
            raise InstanceFormatError("num_nodes", "must be an integer")
        if not isinstance(doc["edges"], list):
            raise InstanceFormatError("edges", "must be a list of [i, j, weight]")
        edges = []
        for k, e in enumerate(doc["edges"]):
            if not isinstance(e, (list, tuple)) or len(e) != 3:
                raise InstanceFormatError(f"edges[{k}]", "expected [i, j, weight]")
            if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in e):
                raise InstanceFormatError(f"edges[{k}]", "entries must be numbers")
            edges.append(tuple(e))
        seed = doc.get("seed")
        if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
            raise InstanceFormatError("seed", "must be an integer or null")
        family = doc.get("family")
        if family is not None and not isinstance(family, str):
            raise InstanceFormatError("family", "must be a string or null")
        return cls(n, tuple(edges), family=family, seed=seed, params=dict(doc.get("params") or {}))


def save_instance(instance: MaxCutInstance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance.to_dict(), indent=2) + "\n")


def load_instance(path: str | Path) -> MaxCutInstance:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceFormatError("<root>", f"invalid JSON: {exc}") from exc
    return MaxCutInstance.from_dict(doc)


@lru_cache(maxsize=4)
def basis_spins(n: int) -> np.ndarray:
    """All 2^n spin assignments as a read-only float array of shape (2^n, n), row b = x(b)."""
    b = np.arange(1 << n, dtype=np.int64)[:, None]
    bits = (b >> np.arange(n, dtype=np.int64)) & 1
    out = 1.0 - 2.0 * bits
    out.flags.writeable = False
    return out


def index_of_spins(x: Sequence[int]) -> int:
    return sum(1 << q for q, s in enumerate(x) if s == -1)


def _check_assignment(instance: MaxCutInstance, x) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (instance.num_nodes,):
        raise ValueError(f"assignment must have length {instance.num_nodes}, got shape {x.shape}")
    if not np.all((x == 1) | (x == -1)):
        raise ValueError("assignment entries must be +1 or -1")
    return x


def cost_of_assignment(instance: MaxCutInstance, x) -> float:
    x = _check_assignment(instance, x)
    return float(sum(w * x[i] * x[j] for i, j, w in instance.edges))


def edge_parities(instance: MaxCutInstance) -> np.ndarray:
    """(E, 2^N) array of z_i z_j over the basis for each edge, as +/-1 floats."""
    n = instance.num_nodes
    b = np.arange(1 << n, dtype=np.int64)
    out = np.empty((instance.num_edges, 1 << n))
    for k, (i, j, _) in enumerate(instance.edges):
        out[k] = 1.0 - 2.0 * (((b >> i) ^ (b >> j)) & 1)
    return out


def build_cost_vector(instance: MaxCutInstance) -> np.ndarray:
    """Diagonal of the Ising Hamiltonian: values[b] = C(x(b))."""
    n = instance.num_nodes
    if n > MAX_NODES:
        raise ValueError(f"num_nodes={n} exceeds the dense limit of {MAX_NODES}")
    b = np.arange(1 << n, dtype=np.int64)
    values = np.zeros(1 << n)
    for i, j, w in instance.edges:
        values += w * (1.0 - 2.0 * (((b >> i) ^ (b >> j)) & 1))
    return values


def brute_force_minimum(instance: MaxCutInstance) -> tuple[float, list[tuple[int, ...]]]:
    values = build_cost_vector(instance)
    c_min = float(values.min())
    # tolerance absorbs summation-order rounding between degenerate assignments
    tol = 1e-9 * max(1.0, abs(c_min))
    idx = np.flatnonzero(values <= c_min + tol)
    n = instance.num_nodes
    minimizers = [tuple(int(1 - 2 * ((b >> q) & 1)) for q in range(n)) for b in idx]
    return c_min, minimizers


def gen_fully_connected(n: int, mean: float, variance: float, seed: int) -> MaxCutInstance:
    """Complete graph with i.i.d. Gaussian(mean, variance) weights, edges in lexicographic order."""
    if n < 2:
        raise ValueError("need at least 2 nodes")
    if variance < 0:
        raise ValueError("variance must be nonnegative")
    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    w = rng.normal(mean, math.sqrt(variance), size=len(pairs))
    edges = tuple((i, j, float(x)) for (i, j), x in zip(pairs, w))
    return MaxCutInstance(n, edges, family="fully_connected", seed=seed,
                          params={"mean": mean, "variance": variance})


def random_regular_edges(n: int, k: int, rng: np.random.Generator, max_tries: int = 100_000) -> list[tuple[int, int]]:
    """Pairing-model k-regular graph; pairings with loops or multi-edges are redrawn whole."""
    if (n * k) % 2 or not 0 <= k < n:
        raise ValueError(f"no simple {k}-regular graph on {n} nodes")
    stubs = np.repeat(np.arange(n), k)
    for _ in range(max_tries):
        perm = rng.permutation(stubs).reshape(-1, 2)
        a, b = perm.min(axis=1), perm.max(axis=1)
        if np.any(a == b):
            continue
        keys = a * n + b
        if len(np.unique(keys)) != len(keys):
            continue
        return sorted(zip(a.tolist(), b.tolist()))
    raise RuntimeError(f"pairing model failed to produce a simple graph after {max_tries} tries")


def gen_k_regular_bimodal(n: int, k: int, mean: float, variance: float, seed: int) -> MaxCutInstance:
    """k-regular graph whose weights come from Gaussian(+mean) or Gaussian(-mean), picked by a fair coin per edge."""
    if variance < 0:
        raise ValueError("variance must be nonnegative")
    rng = np.random.default_rng(seed)
    pairs = random_regular_edges(n, k, rng)
    signs = np.where(rng.random(len(pairs)) < 0.5, 1.0, -1.0)
    w = rng.normal(signs * abs(mean), math.sqrt(variance))
    edges = tuple((i, j, float(x)) for (i, j), x in zip(pairs, w))
    inst = MaxCutInstance(n, edges, family="k_regular_bimodal", seed=seed,
                          params={"degree": k, "mean": abs(mean), "variance": variance})
    inst.params["connected"] = inst.is_connected()
    return inst
