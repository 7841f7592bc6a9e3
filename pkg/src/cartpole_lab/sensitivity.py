"""Trajectory sensitivities with respect to the model parameters.

s_jk(t) = d z_j(t) / d p_k at the nominal parameter point, along the
discrete trajectory produced by the fixed-step integrator. Three routes:

* complex step: one simulation with p_k shifted by i*h*|p_k|; s = Im(z)/(h*|p_k|).
  Immune to subtractive cancellation, so h can be taken down to machine scale.
* central difference: two real simulations at p_k*(1 +- h).
* forward sensitivity system (LTI only): integrate
  sdot = A s + (dA/dp_k) z + (dB/dp_k) v, s(0) = 0, with the same
  integrator and step as the state itself.

Both perturbation methods scale the step by |p_k|: the parameter table
spans ten orders of magnitude, and an absolute step that suits one entry
either dwarfs or underflows another.

ReLU and saturation in a controlled run gate on the real part, so near a
kink the complex-step result is the one-sided derivative.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import lti_matrices
from .integrator import SimConfig, simulate, zero_controller
from .params import PARAM_NAMES, PhysicalParams
from .policy import MlpPolicy, deterministic_voltage

METHODS = ("complex_step", "central_diff", "forward_ode")
DEFAULT_H = {"complex_step": 1e-8, "central_diff": 1e-5, "forward_ode": None}

# "close to zero" start used for the uncontrolled comparisons
UNCONTROLLED_Z0 = (0.01, 0.0, 0.01, 0.0)
UNCONTROLLED_HORIZON = 1.0
CONTROLLED_HORIZON = 10.0


@dataclass(frozen=True)
class PerturbationSpec:
    param_index: int
    method: str = "complex_step"
    h: Optional[float] = None

    def __post_init__(self):
        if not 0 <= self.param_index < len(PARAM_NAMES):
            raise ValueError(f"param_index {self.param_index} out of range")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.h is None:
            object.__setattr__(self, "h", DEFAULT_H[self.method])
        if self.h is not None and self.h <= 0.0:
            raise ValueError(f"step must be positive, got {self.h}")

    @property
    def param_name(self) -> str:
        return PARAM_NAMES[self.param_index]


@dataclass
class SensitivityRecord:
    times: np.ndarray               # (N,)
    s: np.ndarray                   # (4, N), s[j][n] = dz_j/dp_k at step n
    nominal_params: PhysicalParams
    spec: PerturbationSpec
    diverged: bool = False


def _as_controller(controller):
    if controller is None:
        return zero_controller
    if isinstance(controller, MlpPolicy):
        return lambda z: deterministic_voltage(controller, z)
    return controller


def _truncate_nonfinite(times, s, diverged):
    """Cut the record at the first non-finite column; scaling by 1/h can
    overflow even where the raw trajectory is still representable."""
    bad = ~np.all(np.isfinite(s), axis=0)
    if bad.any():
        n = int(np.argmax(bad))
        return times[:n], s[:, :n], True
    return times, s, diverged


def complex_step_derivative(f, x: float, h: float = 1e-8) -> float:
    """Im f(x + ih) / h for a scalar function; unit-level probe of the
    complex-step kernel."""
    return f(complex(x, h)).imag / h


def complex_step_sensitivity(model: str, controller, z0, cfg: SimConfig,
                             spec: PerturbationSpec,
                             params: Optional[PhysicalParams] = None) -> SensitivityRecord:
    """One complex simulation with p_k -> p_k + i h |p_k|."""
    if spec.method != "complex_step":
        raise ValueError(f"spec method is {spec.method!r}, not complex_step")
    nominal = PhysicalParams() if params is None else params
    dh = spec.h * abs(nominal.value(spec.param_index).real)
    perturbed = nominal.perturbed(spec.param_index, complex(0.0, dh))
    traj = simulate(model, _as_controller(controller),
                    np.asarray(z0, dtype=complex), cfg, params=perturbed)
    s = (traj.states.imag / dh).T
    return SensitivityRecord(traj.times, s, nominal, spec, traj.diverged)


def central_diff_sensitivity(model: str, controller, z0, cfg: SimConfig,
                             spec: PerturbationSpec,
                             params: Optional[PhysicalParams] = None) -> SensitivityRecord:
    """Two real simulations at p_k*(1 +- h), differenced by the exact
    representable spacing."""
    if spec.method != "central_diff":
        raise ValueError(f"spec method is {spec.method!r}, not central_diff")
    nominal = PhysicalParams() if params is None else params
    pk = nominal.value(spec.param_index).real
    dh = spec.h * abs(pk)
    ctrl = _as_controller(controller)
    hi = simulate(model, ctrl, z0, cfg, params=nominal.perturbed(spec.param_index, +dh))
    lo = simulate(model, ctrl, z0, cfg, params=nominal.perturbed(spec.param_index, -dh))
    spacing = (pk + dh) - (pk - dh)
    n = min(len(hi.times), len(lo.times))
    s = ((hi.states[:n] - lo.states[:n]) / spacing).T
    return SensitivityRecord(hi.times[:n], s, nominal, spec,
                             hi.diverged or lo.diverged)


def lti_matrix_partials(p: PhysicalParams, k: int):
    """Closed-form dA/dp_k and dB/dp_k of the linear model's entries.

    Parameters absent from the linear model (B_p, B_c, J_m, J_p) yield zero
    matrices, which is a valid (identically zero) sensitivity problem.
    """
    name = PARAM_NAMES[k]
    dA = np.zeros((4, 4))
    dB = np.zeros(4)
    drag = (p.K_g * p.K_g * p.K_t * p.K_m / (p.R_m * p.r_mp * p.r_mp * p.m_c)).real
    gain = (p.K_g * p.K_t / (p.R_m * p.r_mp * p.m_c)).real
    m_c, m_p, l_p, g = p.m_c.real, p.m_p.real, p.l_p.real, p.g.real
    r_mp, R_m, K_g = p.r_mp.real, p.R_m.real, p.K_g.real
    K_m, K_t = p.K_m.real, p.K_t.real

    if name == "m_c":
        dA[1, 1] = drag / m_c
        dA[1, 2] = -m_p * g / (m_c * m_c)
        dA[3, 1] = drag / (m_c * l_p)
        dA[3, 2] = -m_p * g / (m_c * m_c * l_p)
        dB[1] = -gain / m_c
        dB[3] = -gain / (m_c * l_p)
    elif name == "m_p":
        dA[1, 2] = g / m_c
        dA[3, 2] = g / (m_c * l_p)
    elif name == "l_p":
        dA[3, 1] = drag / (l_p * l_p)
        dA[3, 2] = -(m_c + m_p) * g / (m_c * l_p * l_p)
        dB[3] = -gain / (l_p * l_p)
    elif name == "g":
        dA[1, 2] = m_p / m_c
        dA[3, 2] = (m_c + m_p) / (m_c * l_p)
    elif name == "r_mp":
        dA[1, 1] = 2.0 * drag / r_mp
        dA[3, 1] = 2.0 * drag / (r_mp * l_p)
        dB[1] = -gain / r_mp
        dB[3] = -gain / (r_mp * l_p)
    elif name == "R_m":
        dA[1, 1] = drag / R_m
        dA[3, 1] = drag / (R_m * l_p)
        dB[1] = -gain / R_m
        dB[3] = -gain / (R_m * l_p)
    elif name == "K_g":
        dA[1, 1] = -2.0 * drag / K_g
        dA[3, 1] = -2.0 * drag / (K_g * l_p)
        dB[1] = gain / K_g
        dB[3] = gain / (K_g * l_p)
    elif name == "K_m":
        dA[1, 1] = -drag / K_m
        dA[3, 1] = -drag / (K_m * l_p)
    elif name == "K_t":
        dA[1, 1] = -drag / K_t
        dA[3, 1] = -drag / (K_t * l_p)
        dB[1] = gain / K_t
        dB[3] = gain / (K_t * l_p)
    return dA, dB


def forward_ode_sensitivity_lti(z0, cfg: SimConfig, k: int,
                                params: Optional[PhysicalParams] = None) -> SensitivityRecord:
    """Integrate the sensitivity system alongside the uncontrolled LTI state.

    The velocity rows of s are advanced with the pre-step z (product-rule
    term dA z evaluated where the state step evaluates A z), the position
    rows with the already-updated velocity rows. This makes the result the
    exact derivative of the discrete trajectory map.
    """
    nominal = PhysicalParams() if params is None else params
    sys = lti_matrices(nominal)
    A, B = sys.A.real, sys.B.real
    dA, _dB = lti_matrix_partials(nominal, k)   # v = 0: the dB term drops out
    h = cfg.h
    z = np.asarray(z0, dtype=float)
    s = np.zeros(4)
    sens = [s]
    for _ in range(cfg.n_steps):
        fz = A @ z
        fs = A @ s + dA @ z
        s2 = s[1] + h * fs[1]
        s4 = s[3] + h * fs[3]
        s = np.array([s[0] + h * s2, s2, s[2] + h * s4, s4])
        z2 = z[1] + h * fz[1]
        z4 = z[3] + h * fz[3]
        z = np.array([z[0] + h * z2, z2, z[2] + h * z4, z4])
        sens.append(s)
    times = np.arange(len(sens)) * h
    spec = PerturbationSpec(k, "forward_ode", h)
    return SensitivityRecord(times, np.array(sens).T, nominal, spec)


SUITE_SYSTEMS = ("uncontrolled_lab", "uncontrolled_lti",
                 "lti_ctrl_on_lti", "lti_ctrl_on_lab", "lab_ctrl_on_lab")


def sensitivity_suite(lti_policy: Optional[MlpPolicy],
                      lab_policy: Optional[MlpPolicy],
                      param_indices=range(len(PARAM_NAMES)),
                      method: str = "complex_step",
                      h: Optional[float] = None,
                      params: Optional[PhysicalParams] = None,
                      z0=UNCONTROLLED_Z0,
                      uncontrolled_horizon: float = UNCONTROLLED_HORIZON,
                      controlled_horizon: float = CONTROLLED_HORIZON,
                      step: float = 0.01):
    """The comparison grid: both models uncontrolled plus the three
    controlled pairings, for every requested parameter.

    Yields (system_label, SensitivityRecord) in a fixed deterministic order.
    Controlled systems require their policy; passing None skips them with a
    warning so the uncontrolled grid stays usable on its own.
    """
    systems = [
        ("uncontrolled_lab", "lab", None, uncontrolled_horizon, False),
        ("uncontrolled_lti", "lti", None, uncontrolled_horizon, False),
        ("lti_ctrl_on_lti", "lti", lti_policy, controlled_horizon, True),
        ("lti_ctrl_on_lab", "lab", lti_policy, controlled_horizon, True),
        ("lab_ctrl_on_lab", "lab", lab_policy, controlled_horizon, True),
    ]
    compute = (complex_step_sensitivity if method == "complex_step"
               else central_diff_sensitivity)
    out = []
    for label, model, controller, horizon, controlled in systems:
        if controlled and controller is None:
            warnings.warn(f"no controller for {label}; skipped")
            continue
        cfg = SimConfig(h=step, horizon=horizon, model=model)
        for k in param_indices:
            spec = PerturbationSpec(k, method, h)
            out.append((label, compute(model, controller, z0, cfg, spec, params)))
    return out
