"""End-to-end optimization procedures: the plain VQA baseline, ESCAPE and GUIDE.

All three share one circuit-parameter optimizer per run (Adam moments carry
over between phases) and report energies as the exact expectation of the
original Max-Cut Hamiltonian under the simulator's output distribution.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import neural
from .ansatz import Ansatz, check_params
from .gradients import Mode, mode_to_str, output_distribution, value_and_grad
from .optim import (ConvergenceCriterion, Heaviside, OptimizerConfig, Schedule, Stepper,
                    check_convergence, schedule_value)
from .problems import MaxCutInstance, build_cost_vector
from .simulator import NoiseModel, sample_indices, spins_of_indices


class RunAborted(RuntimeError):
    pass


@dataclass(frozen=True)
class EscapeConfig:
    nn_steps: int = 80
    nn_step_size: float = 0.05
    schedule: Schedule = Heaviside(150, 350)
    improvement_threshold: float = 0.1
    optimizer: OptimizerConfig = OptimizerConfig()
    criterion: ConvergenceCriterion = ConvergenceCriterion()
    mode: Mode = "exact"
    noise: NoiseModel | None = None
    nn_batch_size: int = 1024

    def __post_init__(self):
        if self.nn_steps < 0:
            raise ValueError("nn_steps must be >= 0")
        if self.improvement_threshold < 0:
            raise ValueError("improvement threshold must be >= 0")
        if self.nn_step_size < 0:
            raise ValueError("nn_step_size must be >= 0")


@dataclass(frozen=True)
class GuideConfig:
    alpha: float = 0.1
    nn_step_size: float = 0.05
    schedule: Schedule = Heaviside(150, 350)
    optimizer: OptimizerConfig = OptimizerConfig()
    criterion: ConvergenceCriterion = ConvergenceCriterion()
    mode: Mode = "exact"
    noise: NoiseModel | None = None
    nn_batch_size: int = 1024

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.nn_step_size < 0:
            raise ValueError("nn_step_size must be >= 0")


def config_to_dict(config) -> dict:
    out = {}
    for key, value in asdict(config).items():
        attr = getattr(config, key)
        if key == "mode":
            out[key] = mode_to_str(attr)
        elif key == "schedule":
            out[key] = attr.to_dict()
        else:
            out[key] = value
    return out


@dataclass
class RunRecord:
    algorithm: str
    instance_id: str
    ansatz: dict
    run_index: int
    init_seed: int | None
    theta0: list[float]
    traces: dict[str, list[float]]
    c_pre: float | None
    c_post: float | None
    theta_final: list[float]
    improved: bool
    hyperparameters: dict
    w0: list[list[float]] | None = None
    error: str | None = None
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self, include_timing: bool = False) -> dict:
        doc = asdict(self)
        if not include_timing:
            doc.pop("wall_time")
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "RunRecord":
        return cls(**doc)


class _Landscape:
    """Cost and gradient oracle for one run; owns the run's random stream."""

    def __init__(self, ansatz: Ansatz, instance: MaxCutInstance, mode: Mode,
                 noise: NoiseModel | None, rng: np.random.Generator | None):
        if (mode != "exact" or noise is not None) and rng is None:
            raise ValueError("shots mode and noise need an rng")
        self.ansatz = ansatz
        self.instance = instance
        self.mode = mode
        self.noise = noise
        self.rng = rng
        self.cost_vector = build_cost_vector(instance)
        self._w_key = None
        self._w_vector = None

    def _vector(self, w):
        if w is None:
            return self.cost_vector
        key = w.tobytes()
        if key != self._w_key:
            self._w_key, self._w_vector = key, neural.modified_cost_vector(self.instance, w)
        return self._w_vector

    def evaluate(self, theta, w=None):
        """(estimate in the W landscape, its theta-gradient, original-landscape cost, distribution)."""
        value, grad, probs = value_and_grad(self.ansatz, self.instance, self._vector(w), theta,
                                            self.mode, self.rng, self.noise)
        if not (np.isfinite(value) and np.all(np.isfinite(grad))):
            raise RunAborted(f"non-finite cost or gradient at theta={list(theta)}")
        return value, grad, float(probs @ self.cost_vector), probs

    def distribution(self, theta):
        return output_distribution(self.ansatz, self.instance, theta, self.rng, self.noise)

    def weight_grad(self, w, probs, batch_size):
        if self.mode == "exact":
            return neural.exact_grad(self.instance, w, probs)
        idx = sample_indices(probs, batch_size, self.rng)
        return neural.batch_grad(self.instance, w, spins_of_indices(idx, self.instance.num_nodes))


def _descend(land: _Landscape, theta, stepper: Stepper, criterion: ConvergenceCriterion, w=None):
    """Step theta until the criterion fires; returns the final iterate, its cost trace and original cost."""
    history = []
    while True:
        value, grad, cost, _ = land.evaluate(theta, w)
        history.append(value)
        if check_convergence(history, grad, criterion):
            return theta, history, cost
        theta = stepper.step(theta, grad)


def _anneal(land: _Landscape, theta, stepper: Stepper, w0: np.ndarray, schedule: Schedule):
    """One theta step per t = 0..T while W slides from w0 to the identity."""
    eye = np.eye(len(w0))
    modified, original = [], []
    for t in range(schedule.horizon + 1):
        g = schedule_value(schedule, t)
        w = eye if g == 1.0 else (1 - g) * w0 + g * eye
        value, grad, cost, _ = land.evaluate(theta, w)
        modified.append(value)
        original.append(cost)
        theta = stepper.step(theta, grad)
    return theta, modified, original


def _record(algorithm, ansatz, instance, theta0, run_index, init_seed, hyper, **kw) -> RunRecord:
    return RunRecord(algorithm=algorithm, instance_id=instance.instance_id, ansatz=ansatz.to_dict(),
                     run_index=run_index, init_seed=init_seed,
                     theta0=[float(x) for x in theta0], hyperparameters=hyper, **kw)


def run_standard(ansatz: Ansatz, instance: MaxCutInstance, theta0,
                 optimizer: OptimizerConfig = OptimizerConfig(),
                 criterion: ConvergenceCriterion = ConvergenceCriterion(),
                 mode: Mode = "exact", rng: np.random.Generator | None = None,
                 noise: NoiseModel | None = None, run_index: int = 0,
                 init_seed: int | None = None) -> RunRecord:
    """Gradient descent on the unmodified cost until convergence."""
    start = time.perf_counter()
    theta0 = check_params(ansatz, instance, theta0)
    land = _Landscape(ansatz, instance, mode, noise, rng)
    theta, history, cost = _descend(land, theta0.copy(), optimizer.make(), criterion)
    hyper = {"optimizer": asdict(optimizer), "criterion": asdict(criterion), "mode": mode_to_str(mode),
             "noise": asdict(noise) if noise else None}
    return _record("standard", ansatz, instance, theta0, run_index, init_seed, hyper,
                   traces={"descent": history}, c_pre=cost, c_post=cost,
                   theta_final=[float(x) for x in theta], improved=False,
                   wall_time=time.perf_counter() - start)


def run_escape(ansatz: Ansatz, instance: MaxCutInstance, theta0, config: EscapeConfig = EscapeConfig(),
               rng: np.random.Generator | None = None, run_index: int = 0,
               init_seed: int | None = None) -> RunRecord:
    """Converge, deform the landscape with M network steps, anneal back, converge again, keep the better end."""
    start = time.perf_counter()
    theta0 = check_params(ansatz, instance, theta0)
    land = _Landscape(ansatz, instance, config.mode, config.noise, rng)
    stepper = config.optimizer.make()
    n = instance.num_nodes

    theta_lm, hist_pre, c_pre = _descend(land, theta0.copy(), stepper, config.criterion)

    # theta is frozen while W trains, so one distribution serves every exact step
    w = np.eye(n)
    probs = land.distribution(theta_lm)
    nn_trace = [float(probs @ neural.modified_cost_vector(instance, w))]
    for _ in range(config.nn_steps):
        if config.mode != "exact" or config.noise is not None:
            probs = land.distribution(theta_lm)
        w = w - config.nn_step_size * land.weight_grad(w, probs, config.nn_batch_size)
        nn_trace.append(float(probs @ neural.modified_cost_vector(instance, w)))
    w0 = w

    theta, anneal_mod, anneal_orig = _anneal(land, theta_lm, stepper, w0, config.schedule)
    theta_5, hist_post, c_5 = _descend(land, theta, stepper, config.criterion)

    if c_5 < c_pre:
        theta_final, c_post = theta_5, c_5
    else:
        theta_final, c_post = theta_lm, c_pre
    return _record("escape", ansatz, instance, theta0, run_index, init_seed, config_to_dict(config),
                   traces={"descent": hist_pre, "network": nn_trace, "anneal_modified": anneal_mod,
                           "anneal_original": anneal_orig, "final_descent": hist_post},
                   c_pre=c_pre, c_post=c_post, theta_final=[float(x) for x in theta_final],
                   improved=bool(c_pre - c_post > config.improvement_threshold),
                   w0=w0.tolist(), wall_time=time.perf_counter() - start)


def run_guide(ansatz: Ansatz, instance: MaxCutInstance, theta0, config: GuideConfig = GuideConfig(),
              rng: np.random.Generator | None = None, run_index: int = 0,
              init_seed: int | None = None) -> RunRecord:
    """Alternate theta and W steps on the L1-regularized cost, then anneal W to the identity and converge."""
    start = time.perf_counter()
    theta = check_params(ansatz, instance, theta0).copy()
    land = _Landscape(ansatz, instance, config.mode, config.noise, rng)
    stepper = config.optimizer.make()
    n = instance.num_nodes
    eye = np.eye(n)

    w = eye.copy()
    joint = []
    value, grad, _, _ = land.evaluate(theta, w)
    while True:
        joint.append(value + config.alpha * neural.reg_value(w))
        # the L1 subgradient never vanishes off the identity, so only the theta-gradient gates convergence
        if check_convergence(joint, grad, config.criterion):
            break
        theta = stepper.step(theta, grad)
        if config.nn_step_size > 0:
            probs = land.distribution(theta)
            w_grad = land.weight_grad(w, probs, config.nn_batch_size) + config.alpha * neural.reg_subgrad(w)
            w = w - config.nn_step_size * w_grad
        value, grad, _, _ = land.evaluate(theta, w)
    w0 = w

    theta, anneal_mod, anneal_orig = _anneal(land, theta, stepper, w0, config.schedule)
    theta, hist_post, c_post = _descend(land, theta, stepper, config.criterion)
    return _record("guide", ansatz, instance, theta0, run_index, init_seed, config_to_dict(config),
                   traces={"joint": joint, "anneal_modified": anneal_mod,
                           "anneal_original": anneal_orig, "final_descent": hist_post},
                   c_pre=None, c_post=c_post, theta_final=[float(x) for x in theta],
                   improved=False, w0=w0.tolist(), wall_time=time.perf_counter() - start)
