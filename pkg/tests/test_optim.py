import numpy as np
import pytest

from nnvqa.optim import (AdamState, ConvergenceCriterion, Heaviside, Linear, OptimizerConfig, adam_step,
                         check_convergence, gd_step, schedule_value)


def reference_adam(grads, eta, b1=0.9, b2=0.999, eps=1e-8, x0=0.0):
    """Textbook scalar recursion written out longhand."""
    x, m, v = x0, 0.0, 0.0
    out = []
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        x = x - eta * (m / (1 - b1 ** t)) / (np.sqrt(v / (1 - b2 ** t)) + eps)
        out.append(x)
    return out


def test_adam_matches_reference():
    grads = [0.5, -1.2, 3.0, 0.01, -0.4]
    state = AdamState(0.1)
    x = np.array([0.0])
    got = []
    for g in grads:
        state, x = adam_step(state, x, np.array([g]))
        got.append(x[0])
    assert np.allclose(got, reference_adam(grads, 0.1), atol=1e-15)


def test_adam_first_step_is_sign_times_eta():
    state, x = adam_step(AdamState(0.3), np.zeros(3), np.array([2.0, -0.001, 5.0]))
    assert np.allclose(x, [-0.3, 0.3, -0.3], atol=1e-5)


def test_adam_zero_gradient_keeps_params():
    _, x = adam_step(AdamState(0.1), np.ones(2), np.zeros(2))
    assert np.array_equal(x, np.ones(2))


def test_gd_and_errors():
    assert np.allclose(gd_step(np.array([1.0, 2.0]), np.array([0.5, -1.0]), 0.1), [0.95, 2.1])
    with pytest.raises(FloatingPointError):
        gd_step(np.zeros(2), np.array([np.nan, 0.0]), 0.1)
    with pytest.raises(ValueError):
        gd_step(np.zeros(2), np.zeros(3), 0.1)
    with pytest.raises(ValueError):
        AdamState(0.0)
    with pytest.raises(ValueError):
        OptimizerConfig(kind="sgd")


def test_stepper_gd_quadratic_converges():
    opt = OptimizerConfig(kind="gd", step_size=0.1).make()
    x = np.array([3.0, -2.0])
    for _ in range(200):
        x = opt.step(x, 2 * x)
    assert np.allclose(x, 0, atol=1e-10)


def test_schedules():
    h = Heaviside(150, 350)
    assert schedule_value(h, 149) == 0.0
    assert schedule_value(h, 150) == 1.0
    assert schedule_value(Heaviside(0, 10), 0) == 1.0
    lin = Linear(350)
    assert schedule_value(lin, 0) == 0.0 and schedule_value(lin, 350) == 1.0
    assert schedule_value(lin, 175) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        schedule_value(lin, 351)
    with pytest.raises(ValueError):
        Heaviside(400, 350)


def test_convergence_rules():
    crit = ConvergenceCriterion(grad_inf_tol=1e-3, cost_change_tol=1e-5, window=3, max_iters=10)
    assert check_convergence([1.0], np.array([1e-4]), crit)
    assert not check_convergence([1.0], np.array([1e-2]), crit)
    assert check_convergence([1.0, 1.0 + 1e-6, 1.0], np.array([1.0]), crit)
    assert not check_convergence([1.0, 0.9, 0.8], np.array([1.0]), crit)
    assert check_convergence(list(range(10)), np.array([1.0]), crit)
