"""Update rules, annealing schedules and the stopping rule shared by all procedures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _check(params: np.ndarray, grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    params = np.asarray(params, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if params.shape != grad.shape:
        raise ValueError(f"gradient shape {grad.shape} does not match parameters {params.shape}")
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError("non-finite gradient")
    return params, grad


@dataclass(frozen=True)
class GdConfig:
    step_size: float

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValueError("step size must be positive")


def gd_step(params: np.ndarray, grad: np.ndarray, step_size: float) -> np.ndarray:
    params, grad = _check(params, grad)
    return params - step_size * grad


@dataclass
class AdamState:
    step_size: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    m: np.ndarray | None = None
    v: np.ndarray | None = None
    t: int = 0

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValueError("step size must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1) or not self.epsilon > 0:
            raise ValueError("need beta1, beta2 in [0, 1) and epsilon > 0")


def adam_step(state: AdamState, params: np.ndarray, grad: np.ndarray) -> tuple[AdamState, np.ndarray]:
    """One bias-corrected Adam update; ``state`` is advanced in place and returned."""
    params, grad = _check(params, grad)
    if state.m is None:
        state.m = np.zeros_like(params)
        state.v = np.zeros_like(params)
    elif state.m.shape != params.shape:
        raise ValueError("Adam moments do not match the parameter shape")
    state.t += 1
    state.m = state.beta1 * state.m + (1 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1 - state.beta2) * grad * grad
    m_hat = state.m / (1 - state.beta1 ** state.t)
    v_hat = state.v / (1 - state.beta2 ** state.t)
    return state, params - state.step_size * m_hat / (np.sqrt(v_hat) + state.epsilon)


@dataclass(frozen=True)
class OptimizerConfig:
    """Circuit-parameter optimizer: plain gradient descent or Adam."""

    kind: str = "adam"
    step_size: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.kind not in ("gd", "adam"):
            raise ValueError(f"optimizer kind must be 'gd' or 'adam', got {self.kind!r}")
        if not self.step_size > 0:
            raise ValueError("step size must be positive")

    def make(self) -> "Stepper":
        return Stepper(self)


class Stepper:
    """Stateful wrapper so callers can write ``theta = opt.step(theta, grad)`` for either rule."""

    def __init__(self, config: OptimizerConfig):
        self.config = config
        self.adam = (AdamState(config.step_size, config.beta1, config.beta2, config.epsilon)
                     if config.kind == "adam" else None)

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self.adam is None:
            return gd_step(params, grad, self.config.step_size)
        _, params = adam_step(self.adam, params, grad)
        return params


@dataclass(frozen=True)
class Heaviside:
    """g(t) = 0 before ``threshold`` and 1 from it on (Theta(0) = 1)."""

    threshold: int
    horizon: int

    def __post_init__(self):
        if not 0 <= self.threshold <= self.horizon:
            raise ValueError("need 0 <= threshold <= horizon so that g(horizon) = 1")

    def to_dict(self) -> dict:
        return {"kind": "heaviside", "threshold": self.threshold, "horizon": self.horizon}


@dataclass(frozen=True)
class Linear:
    """g(t) = t / horizon."""

    horizon: int

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")

    def to_dict(self) -> dict:
        return {"kind": "linear", "horizon": self.horizon}


Schedule = Heaviside | Linear


def schedule_value(schedule: Schedule, t: int) -> float:
    if not 0 <= t <= schedule.horizon:
        raise ValueError(f"t={t} outside [0, {schedule.horizon}]")
    if isinstance(schedule, Heaviside):
        return 1.0 if t >= schedule.threshold else 0.0
    return t / schedule.horizon


@dataclass(frozen=True)
class ConvergenceCriterion:
    grad_inf_tol: float = 1e-3
    cost_change_tol: float = 1e-5
    window: int = 20
    max_iters: int = 2000

    def __post_init__(self):
        if min(self.grad_inf_tol, self.cost_change_tol) <= 0 or min(self.window, self.max_iters) < 1:
            raise ValueError("convergence tolerances and counts must be positive")


def check_convergence(history, grad, criterion: ConvergenceCriterion = ConvergenceCriterion()) -> bool:
    """True once the gradient is small, the cost has been flat for ``window`` entries, or the budget is spent.

    ``history`` holds one cost per evaluated iterate, so its length is the iteration count.
    """
    if len(history) >= criterion.max_iters:
        return True
    if grad is not None and np.max(np.abs(grad), initial=0.0) < criterion.grad_inf_tol:
        return True
    if len(history) >= criterion.window:
        recent = np.asarray(history[-criterion.window:], dtype=float)
        if np.max(np.abs(np.diff(recent)), initial=0.0) < criterion.cost_change_tol:
            return True
    return False
