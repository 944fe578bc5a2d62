"""Acceptance criteria 1-10; each test prints one PASS/FAIL line (also repeated in the terminal summary)."""

import itertools
import json
import time

import numpy as np
import pytest

from nnvqa.algorithms import EscapeConfig, run_escape
from nnvqa.ansatz import HardwareEfficient, QAOA, expectation, random_init
from nnvqa.cli import main as cli_main
from nnvqa.gradients import finite_diff_grad, param_shift_grad
from nnvqa.harness.batch import run_batch
from nnvqa.harness.config import list_presets, load_config, validate_config
from nnvqa.harness.stats import summarize
from nnvqa.neural import exact_grad, forward, grad_w, modified_cost_vector, relaxed_cost
from nnvqa.problems import (basis_spins, brute_force_minimum, build_cost_vector, gen_fully_connected,
                            gen_k_regular_bimodal)
from nnvqa.simulator import NoiseModel, make_rng, run_noisy_expectation

from conftest import ACCEPTANCE_LINES

INSTANCE_A = {"generator": "fully_connected", "num_nodes": 5, "mean": 0.0, "variance": 1.0, "seed": 7}
DEPTHS = [1, 2, 3, 4, 5]


def report(n: int, title: str, ok: bool, detail: str) -> None:
    line = f"CRITERION {n:2d} {title}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def batch(algorithm, inits, **extra):
    doc = {"instance": INSTANCE_A, "ansatz": {"type": "qaoa", "p": DEPTHS}, "algorithm": algorithm,
           "inits": inits, "base_seed": 2024, "optimizer": {"kind": "adam", "step_size": 0.1}}
    doc.update(extra)
    cfg = validate_config(doc)
    start = time.perf_counter()
    records = run_batch(cfg)
    return cfg, records, time.perf_counter() - start


@pytest.fixture(scope="module")
def escape_batch():
    return batch("escape", 50, escape={"nn_steps": 80})


@pytest.fixture(scope="module")
def guide_batch():
    return batch("guide", 100, guide={"alpha": 0.1})


@pytest.fixture(scope="module")
def noisy_escapes():
    inst = gen_fully_connected(5, 0.0, 1.0, seed=7)
    rng = make_rng(99)
    out = []
    for q in (0.01, 0.05):
        for p in (1, 2):
            cfg = EscapeConfig(noise=NoiseModel(q, 20))
            try:
                out.append((q, p, run_escape(QAOA(p), inst, random_init(QAOA(p), 5, rng), cfg, rng=make_rng(p)), None))
            except Exception as exc:  # reported, not raised
                out.append((q, p, None, exc))
    return out


# 1 -----------------------------------------------------------------------------------

def _gradient_configs():
    rng = np.random.default_rng(20240)
    for i in range(50):
        seed = int(rng.integers(1 << 31))
        family = i % 5
        if family in (0, 1):
            inst = gen_fully_connected(5, 0.0, 1.0, seed)
        elif family == 2:
            inst = gen_k_regular_bimodal(8, 5, 1.0, 0.3, seed)
        elif family == 3:
            inst = gen_k_regular_bimodal(16, 3, 1.0, 1.0, seed)
        else:
            inst = gen_k_regular_bimodal(8, 5, 1.0, 0.3, seed) if i % 2 else gen_fully_connected(5, 0.0, 1.0, seed)
        theta_rng = make_rng(seed)
        if family == 4:
            ansatz = HardwareEfficient.random(inst.num_nodes, theta_rng)
        else:
            ansatz = QAOA(1 + (i // 5) % 3)
        yield inst, ansatz, random_init(ansatz, inst.num_nodes, theta_rng)


def test_criterion_01_gradient_correctness():
    start = time.perf_counter()
    worst, count = 0.0, 0
    for inst, ansatz, theta in _gradient_configs():
        cv = build_cost_vector(inst)
        g = param_shift_grad(ansatz, inst, cv, theta)
        fd = finite_diff_grad(ansatz, inst, cv, theta, h=1e-5)
        tol = max(1e-6, 1e-4 * np.max(np.abs(g)))
        worst = max(worst, float(np.max(np.abs(g - fd)) / tol))
        count += 1
    elapsed = time.perf_counter() - start
    report(1, "parameter-shift vs finite differences", count == 50 and worst <= 1 and elapsed < 60,
           f"{count} configs, worst error/tolerance {worst:.3g}, {elapsed:.1f}s < 60s")


# 2 -----------------------------------------------------------------------------------

def test_criterion_02_backprop_correctness():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 9))
        inst = gen_fully_connected(n, 0.0, 1.0, int(rng.integers(1 << 31)))
        w = rng.normal(size=(n, n))
        x = rng.choice([-1.0, 1.0], size=n)
        h = 1e-6
        fd = np.zeros((n, n))
        for i, k in itertools.product(range(n), range(n)):
            e = np.zeros((n, n))
            e[i, k] = h
            fd[i, k] = (relaxed_cost(inst, forward(w + e, x)) - relaxed_cost(inst, forward(w - e, x))) / (2 * h)
        worst = max(worst, float(np.max(np.abs(grad_w(inst, w, x) - fd))))
    inst = gen_fully_connected(5, 0.0, 1.0, 7)
    w = np.eye(5) + 0.3 * rng.normal(size=(5, 5))
    probs = rng.random(32)
    probs /= probs.sum()
    summed = sum(p * grad_w(inst, w, x) for p, x in zip(probs, basis_spins(5)))
    enum_err = float(np.max(np.abs(exact_grad(inst, w, probs) - summed)))
    report(2, "backpropagation", worst <= 1e-6 and enum_err <= 1e-12,
           f"max FD error {worst:.2e} <= 1e-6, enumerated vs weighted sum {enum_err:.1e} <= 1e-12")


# 3 -----------------------------------------------------------------------------------

def test_criterion_03_identity_reduction():
    inst = gen_fully_connected(5, 0.0, 1.0, 7)
    cv = build_cost_vector(inst)
    hw = modified_cost_vector(inst, np.eye(5))
    rng = make_rng(3)
    worst = 0.0
    for k in range(20):
        ansatz = QAOA(1 + k % 3)
        theta = random_init(ansatz, 5, rng)
        lhs = expectation(ansatz, inst, theta, hw)
        rhs = np.tanh(1.0) ** 2 * expectation(ansatz, inst, theta, cv)
        worst = max(worst, abs(lhs - rhs))
    report(3, "identity network reduces to scaled cost", worst <= 1e-10, f"max deviation {worst:.1e} at 20 thetas")


# 4 -----------------------------------------------------------------------------------

ORIGINAL_TRACES = ("descent", "anneal_original", "final_descent")


def _bound_violations(records, c_min):
    checked, bad = 0, 0
    for r in records:
        values = [r.c_post] + ([r.c_pre] if r.c_pre is not None else [])
        for key in ORIGINAL_TRACES:
            values += r.traces.get(key, [])
        checked += len(values)
        bad += sum(v < c_min - 1e-9 for v in values)
    return checked, bad


def test_criterion_04_variational_bound(escape_batch, guide_batch):
    c_min = brute_force_minimum(gen_fully_connected(5, 0.0, 1.0, 7))[0]
    checked, bad = 0, 0
    for _, records, _ in (escape_batch, guide_batch):
        c, b = _bound_violations(records, c_min)
        checked, bad = checked + c, bad + b
    inst16 = gen_k_regular_bimodal(16, 3, 1.0, 1.0, 13)
    cv16 = build_cost_vector(inst16)
    c_min16 = brute_force_minimum(inst16)[0]
    rng = make_rng(4)
    for p in (1, 2, 3):
        for _ in range(5):
            checked += 1
            bad += expectation(QAOA(p), inst16, random_init(QAOA(p), 16, rng), cv16) < c_min16 - 1e-9
    inst8 = gen_k_regular_bimodal(8, 5, 1.0, 0.3, 11)
    hea = HardwareEfficient.random(8, rng)
    rec = run_escape(hea, inst8, random_init(hea, 8, rng), EscapeConfig(nn_steps=50))
    c, b = _bound_violations([rec], brute_force_minimum(inst8)[0])
    checked, bad = checked + c, bad + b
    report(4, "variational lower bound", bad == 0, f"{checked} reported costs (N = 5, 8, 16), {bad} below ground energy")


# 5 -----------------------------------------------------------------------------------

def test_criterion_05_escape_never_worse(escape_batch, noisy_escapes):
    records = [r for r in escape_batch[1]] + [r for _, _, r, _ in noisy_escapes if r is not None]
    bad = [r for r in records if r.error is None and not r.c_post <= r.c_pre]
    errors = [r for r in records if r.error is not None]
    report(5, "ESCAPE C_post <= C_pre", not bad and not errors,
           f"{len(records)} runs, {len(bad)} violations, {len(errors)} errors")


# 6 -----------------------------------------------------------------------------------

def test_criterion_06_escape_efficacy(escape_batch):
    cfg, records, elapsed = escape_batch
    rows = [s for s in summarize(records, "all", 0.1) if s.algorithm == "escape"]
    depths_ok = sum(s.pct_improved > 0 for s in rows)
    consistent = all((r.c_pre - r.c_post > 0.1) == r.improved for r in records)
    pct = ", ".join(f"p={s.group}: {s.pct_improved:.0f}%" for s in rows)
    report(6, "ESCAPE efficacy", depths_ok >= 3 and consistent and elapsed < 900,
           f"improved at {depths_ok}/5 depths [{pct}], {elapsed:.0f}s < 900s")


# 7 -----------------------------------------------------------------------------------

def test_criterion_07_guide_efficacy(guide_batch):
    cfg, records, elapsed = guide_batch
    rows = summarize(records, "all", 0.1)
    by = {(s.group, s.algorithm): s for s in rows}
    wins = [g for g in map(str, DEPTHS) if by[g, "guide"].median <= by[g, "standard"].median]
    detail = ", ".join(f"p={g}: {by[g, 'guide'].median:.3f} vs {by[g, 'standard'].median:.3f}" for g in map(str, DEPTHS))
    paired = all(by[g, "guide"].count == 100 for g in map(str, DEPTHS))
    report(7, "GUIDE efficacy", len(wins) >= 3 and paired and elapsed < 1800,
           f"GUIDE median <= standard at {len(wins)}/5 depths [{detail}], {elapsed:.0f}s < 1800s")


# 8 -----------------------------------------------------------------------------------

def _enumerated_noise(inst, theta, q):
    from nnvqa import simulator as sim
    n, p = inst.num_nodes, len(theta) // 2
    cv = build_cost_vector(inst)
    total = 0.0
    for pattern in itertools.product(range(1 << n), repeat=p):
        weight = np.prod([q ** bin(m).count("1") * (1 - q) ** (n - bin(m).count("1")) for m in pattern])
        state = sim.init_plus(n)
        for layer, m in enumerate(pattern):
            sim.apply_diagonal_phase(state, cv, theta[2 * layer])
            sim.apply_mixer(state, theta[2 * layer + 1])
            state.amplitudes = sim.apply_flips(state.amplitudes[None], n, np.array([m]))[0]
        total += weight * sim.expectation_diagonal(state, cv)
    return total


def test_criterion_08_noise_consistency(noisy_escapes):
    inst5 = gen_fully_connected(5, 0.0, 1.0, 7)
    cv5 = build_cost_vector(inst5)
    rng = make_rng(8)
    zero_dev = 0.0
    for p in (1, 2, 3):
        theta = random_init(QAOA(p), 5, rng)
        noisy = run_noisy_expectation(QAOA(p), inst5, theta, cv5, NoiseModel(0.0, 10), rng)
        zero_dev = max(zero_dev, abs(noisy - expectation(QAOA(p), inst5, theta, cv5)))

    worst_sigma = 0.0
    for n, p, q in ((2, 1, 0.05), (3, 2, 0.1), (3, 1, 0.3)):
        inst = gen_fully_connected(n, 0.0, 1.0, 100 + n)
        cv = build_cost_vector(inst)
        theta = random_init(QAOA(p), n, rng)
        exact = _enumerated_noise(inst, theta, q)
        means = np.array([run_noisy_expectation(QAOA(p), inst, theta, cv, NoiseModel(q, 1000), rng)
                          for _ in range(100)])  # K = 10^5 trajectories in 100 blocks
        sigma = means.std(ddof=1) / np.sqrt(len(means))
        worst_sigma = max(worst_sigma, abs(means.mean() - exact) / sigma)

    failures = [(q, p, repr(e)) for q, p, r, e in noisy_escapes if e is not None or r.error is not None]
    report(8, "noise consistency", zero_dev <= 1e-12 and worst_sigma <= 3 and not failures,
           f"q=0 deviation {zero_dev:.1e}, K=1e5 vs enumeration {worst_sigma:.2f} sigma, "
           f"{len(noisy_escapes)} noisy ESCAPE runs at q in {{0.01, 0.05}}, {len(failures)} failed")


# 9 -----------------------------------------------------------------------------------

def test_criterion_09_performance():
    inst = gen_k_regular_bimodal(16, 3, 1.0, 1.0, 13)
    assert inst.num_edges == 24
    theta = random_init(QAOA(3), 16, make_rng(0))
    cv = build_cost_vector(inst)
    expectation(QAOA(3), inst, theta, cv)  # warm caches
    t0 = time.perf_counter()
    expectation(QAOA(3), inst, theta, cv)
    t_eval = time.perf_counter() - t0
    t0 = time.perf_counter()
    param_shift_grad(QAOA(3), inst, cv, theta)
    t_grad = time.perf_counter() - t0
    inst_a = gen_fully_connected(5, 0.0, 1.0, 7)
    t0 = time.perf_counter()
    run_escape(QAOA(3), inst_a, random_init(QAOA(3), 5, make_rng(1)), EscapeConfig())
    t_escape = time.perf_counter() - t0
    report(9, "performance", t_eval < 0.1 and t_grad < 10 and t_escape < 60,
           f"16-qubit p=3 evaluation {1000 * t_eval:.0f}ms < 100ms, gradient {t_grad:.2f}s < 10s, "
           f"ESCAPE p=3 T=350 {t_escape:.2f}s < 60s")


# 10 ----------------------------------------------------------------------------------

def _reduced(doc: dict) -> dict:
    doc = json.loads(json.dumps(doc))
    doc["inits"] = 1
    if doc["ansatz"]["type"] == "qaoa":
        doc["ansatz"]["p"] = [doc["ansatz"]["p"][0] if isinstance(doc["ansatz"]["p"], list) else doc["ansatz"]["p"]]
    else:
        doc["ansatz"]["architectures"] = 1
    doc["convergence"]["max_iters"] = 10
    for key in ("escape", "guide"):
        doc[key]["schedule"] = {"kind": doc[key]["schedule"]["kind"], "threshold": 2, "horizon": 4}
    if doc.get("noise"):
        doc["noise"]["trajectories"] = 10
    return doc


def test_criterion_10_determinism(tmp_path):
    mismatched = []
    names = list_presets()
    for name in names:
        cfg_path = tmp_path / f"{name}.json"
        cfg_path.write_text(json.dumps(_reduced(load_config(f"preset:{name}").model_dump(mode="json"))))
        out = tmp_path / name
        blobs = []
        for _ in range(2):
            assert cli_main(["run", "--config", str(cfg_path), "--out", str(out), "--quiet"]) == 0
            blobs.append(((out / "records.json").read_bytes(), (out / "stats.csv").read_bytes()))
        if blobs[0] != blobs[1]:
            mismatched.append(name)
    report(10, "determinism", not mismatched,
           f"{len(names)} presets run twice at reduced scale, {len(mismatched)} differ")
