"""Neural-network-assisted variational quantum optimization for weighted Max-Cut."""

from .algorithms import EscapeConfig, GuideConfig, RunRecord, run_escape, run_guide, run_standard
from .ansatz import QAOA, HardwareEfficient, expectation, prepare_state
from .gradients import finite_diff_grad, param_shift_grad, value_and_grad
from .problems import (MaxCutInstance, brute_force_minimum, build_cost_vector, gen_fully_connected,
                       gen_k_regular_bimodal, load_instance, save_instance)

__version__ = "0.1.0"

__all__ = [
    "EscapeConfig", "GuideConfig", "RunRecord", "run_escape", "run_guide", "run_standard",
    "QAOA", "HardwareEfficient", "expectation", "prepare_state",
    "finite_diff_grad", "param_shift_grad", "value_and_grad",
    "MaxCutInstance", "brute_force_minimum", "build_cost_vector", "gen_fully_connected",
    "gen_k_regular_bimodal", "load_instance", "save_instance",
]
