"""Cart-pole control laboratory.

Trains Gaussian-policy neural controllers with REINFORCE on two cart-pole
models (a detailed bench model and an LTI simplification), cross-deploys
them, measures parameter sensitivity by complex-step differentiation, and
estimates regions of attraction by Monte Carlo simulation.
"""
from .params import PARAM_NAMES, PhysicalParams
from .dynamics import LtiSystem, lab_rhs, lti_matrices, lti_rhs, simplified_rhs
from .integrator import (SimConfig, Trajectory, make_rhs, semi_euler_step,
                         simulate, zero_controller)
from .policy import (ARCH, GaussianHead, MlpPolicy, V_SCALE,
                     deterministic_voltage, forward, init_policy,
                     relu_complex, sample_action)
from .trainer import (EpisodeRecord, NAdamState, TrainerConfig, TrainResult,
                      discounted_returns, nadam_step, policy_loss, reward,
                      train)
from .sensitivity import (PerturbationSpec, SensitivityRecord,
                          central_diff_sensitivity, complex_step_sensitivity,
                          forward_ode_sensitivity_lti, sensitivity_suite)
from .roa import (RefinementConfig, RoaConfig, RoaSample, classify_ic,
                  refine, roa_report, uniform_phase)
from .weights_io import load_policy, save_policy

__version__ = "0.1.0"
