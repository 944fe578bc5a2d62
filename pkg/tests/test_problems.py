import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nnvqa.problems import (InstanceFormatError, MaxCutInstance, basis_spins, brute_force_minimum,
                            build_cost_vector, cost_of_assignment, gen_fully_connected,
                            gen_k_regular_bimodal, index_of_spins, load_instance, save_instance)

from conftest import dense_cost, enumerate_spins, random_instance


def test_triangle_minimum_and_minimizers(triangle):
    c_min, minimizers = brute_force_minimum(triangle)
    assert c_min == pytest.approx(-1.0)
    assert len(minimizers) == 6
    flipped = {tuple(-s for s in m) for m in minimizers}
    assert flipped == set(minimizers)


def test_single_negative_edge_prefers_alignment():
    inst = MaxCutInstance(2, ((0, 1, -2.0),))
    c_min, minimizers = brute_force_minimum(inst)
    assert c_min == -2.0
    assert set(minimizers) == {(1, 1), (-1, -1)}


def test_cost_vector_matches_dense_operator(instance_a):
    assert np.allclose(build_cost_vector(instance_a), np.diag(dense_cost(instance_a)).real, atol=1e-12)


def test_cost_vector_matches_assignment_cost():
    rng = np.random.default_rng(0)
    for _ in range(5):
        inst = random_instance(rng, int(rng.integers(2, 9)), 0.6)
        cv = build_cost_vector(inst)
        for _ in range(100):
            x = rng.choice([-1, 1], size=inst.num_nodes)
            assert cv[index_of_spins(x)] == pytest.approx(cost_of_assignment(inst, x), abs=1e-12)


def test_basis_spins_convention():
    spins = basis_spins(3)
    assert spins.shape == (8, 3)
    for b, s in enumerate(enumerate_spins(3)):
        assert np.array_equal(spins[b], s)
        assert index_of_spins(s) == b


def test_brute_force_matches_exhaustive_recomputation():
    rng = np.random.default_rng(1)
    inst = random_instance(rng, 7, 0.7)
    values = [cost_of_assignment(inst, s) for s in enumerate_spins(7)]
    assert brute_force_minimum(inst)[0] == pytest.approx(min(values), abs=1e-12)


def test_fully_connected_generator():
    inst = gen_fully_connected(5, 0.0, 1.0, seed=3)
    assert inst.num_edges == 10
    assert inst == gen_fully_connected(5, 0.0, 1.0, seed=3)
    assert inst != gen_fully_connected(5, 0.0, 1.0, seed=4)
    flat = gen_fully_connected(6, 0.7, 0.0, seed=1)
    assert np.allclose(flat.weights, 0.7)


def test_fully_connected_variance_is_variance():
    inst = gen_fully_connected(24, 0.0, 4.0, seed=0)
    assert 1.5 < inst.weights.std() < 2.5


@pytest.mark.parametrize("n,k,edges", [(8, 5, 20), (16, 3, 24), (8, 4, 16)])
def test_k_regular_degrees(n, k, edges):
    inst = gen_k_regular_bimodal(n, k, 1.0, 0.3, seed=5)
    assert inst.num_edges == edges
    deg = np.zeros(n, dtype=int)
    for i, j, _ in inst.edges:
        deg[i] += 1
        deg[j] += 1
    assert np.all(deg == k)
    assert inst.params["connected"] == inst.is_connected()


def test_k_regular_zero_variance_has_unit_magnitudes():
    inst = gen_k_regular_bimodal(8, 5, 1.5, 0.0, seed=2)
    assert np.allclose(np.abs(inst.weights), 1.5)
    assert {np.sign(w) for w in inst.weights} == {-1.0, 1.0}


@pytest.mark.parametrize("n,k", [(7, 3), (5, 5), (4, 7)])
def test_k_regular_infeasible(n, k):
    with pytest.raises(ValueError):
        gen_k_regular_bimodal(n, k, 1.0, 1.0, seed=0)


@pytest.mark.parametrize("doc,field", [
    ({"edges": []}, "num_nodes"),
    ({"num_nodes": 3, "edges": [[0, 0, 1.0]]}, "edges[0]"),
    ({"num_nodes": 3, "edges": [[0, 1, 1.0], [1, 0, 2.0]]}, "edges[1]"),
    ({"num_nodes": 3, "edges": [[0, 5, 1.0]]}, "edges[0]"),
    ({"num_nodes": 3, "edges": [[0, 1]]}, "edges[0]"),
    ({"num_nodes": "3", "edges": []}, "num_nodes"),
])
def test_invalid_documents_name_the_field(doc, field):
    with pytest.raises(InstanceFormatError) as info:
        MaxCutInstance.from_dict(doc)
    assert info.value.field == field


def test_roundtrip(tmp_path, instance_b):
    path = tmp_path / "inst.json"
    save_instance(instance_b, path)
    again = load_instance(path)
    assert again == instance_b
    assert json.loads(path.read_text())["num_nodes"] == 8


def test_edges_are_normalized():
    inst = MaxCutInstance(3, ((2, 0, 1.0),))
    assert inst.edges == ((0, 2, 1.0),)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_brute_force_is_a_lower_bound(n, seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n, 0.8)
    cv = build_cost_vector(inst)
    p = rng.random(len(cv))
    p /= p.sum()
    assert brute_force_minimum(inst)[0] <= p @ cv + 1e-12
