"""Fixed-step time stepping shared by training, sensitivity and ROA runs.

The scheme is the symplectic (semi-implicit) Euler variant for mechanical
systems: velocities are advanced from the accelerations at the current
state, then positions are advanced with the already-updated velocities.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import dynamics
from .params import PhysicalParams

MODELS = ("lab", "lti", "simplified")

DEFAULT_STEP = 0.01  # s, the fixed control/integration period


@dataclass
class SimConfig:
    h: float = DEFAULT_STEP
    horizon: float = 10.0           # s
    model: str = "lab"

    def __post_init__(self):
        if self.h <= 0.0:
            raise ValueError(f"step size must be positive, got {self.h}")
        if self.horizon < self.h:
            raise ValueError(f"horizon {self.horizon} shorter than one step {self.h}")
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}, expected one of {MODELS}")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.h))


@dataclass
class Trajectory:
    """Time-indexed record of one simulation.

    `voltages` has one entry fewer than `states`: the input held over
    [t_k, t_k + h) is voltages[k], and no action follows the final state.
    times[k] is computed as k*h, never by cumulative summation.
    """

    times: np.ndarray       # (N,)
    states: np.ndarray      # (N, 4)
    voltages: np.ndarray    # (N - 1,)
    step: float
    diverged: bool = False


def zero_controller(z):
    return 0.0


def make_rhs(model: str, params: PhysicalParams) -> Callable:
    """Bind a model name to a parameter set, returning rhs(z, u)."""
    if model == "lab":
        return lambda z, u: dynamics.lab_rhs(z, params, u)
    if model == "lti":
        sys = dynamics.lti_matrices(params)
        A, B = sys.A, sys.B
        return lambda z, u: dynamics.lti_matvec(A, z) + B * u
    if model == "simplified":
        # u is interpreted as a cart force, not a voltage
        return lambda z, u: dynamics.simplified_rhs(z, params, u)
    raise ValueError(f"unknown model {model!r}, expected one of {MODELS}")


def semi_euler_step(rhs, z, v_m, h: float):
    """One step: velocities first, positions from the updated velocities."""
    dz = rhs(z, v_m)
    z2 = z[1] + h * dz[1]
    z4 = z[3] + h * dz[3]
    return np.array([z[0] + h * z2, z2, z[2] + h * z4, z4])


def simulate(model: Optional[str], controller, z0, cfg: SimConfig,
             params: Optional[PhysicalParams] = None) -> Trajectory:
    """Roll the closed loop forward for cfg.horizon seconds.

    `controller` maps a state to the applied input and is evaluated once per
    step on the pre-step state (zero-order hold). A non-finite state stops
    the run early; the truncated trajectory is returned with the `diverged`
    flag set rather than raising.
    """
    if params is None:
        params = PhysicalParams()
    if controller is None:
        controller = zero_controller
    rhs = make_rhs(model if model is not None else cfg.model, params)
    z = np.asarray(z0)
    states = [z]
    voltages = []
    diverged = False
    # overflow is an expected way for a run to end; the finite check below
    # turns it into the diverged flag instead of a warning storm
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(cfg.n_steps):
            u = controller(z)
            z_next = semi_euler_step(rhs, z, u, cfg.h)
            if not np.all(np.isfinite(z_next)):
                diverged = True
                break
            voltages.append(u)
            states.append(z_next)
            z = z_next
    times = np.arange(len(states)) * cfg.h
    return Trajectory(times, np.array(states), np.array(voltages), cfg.h, diverged)
