"""Physical constants of the cart-pole rig.

The defaults are the nominal bench values. Fields may hold complex numbers
so that a single parameter can carry an imaginary perturbation for
derivative probes; the nominal (real) construction is the common case.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

# Frozen row order of the parameter table. Sensitivity output files, the
# CLI --param flag and every `param_index` argument index into this tuple.
PARAM_NAMES = (
    "m_c", "m_p", "l_p", "g", "r_mp", "R_m", "B_p", "B_c",
    "K_g", "K_m", "K_t", "J_m", "J_p",
)


@dataclass(frozen=True)
class PhysicalParams:
    """Rig constants; real parts are strictly positive at the nominal point."""

    m_c: complex = 0.94         # cart mass, kg
    m_p: complex = 0.23         # pendulum mass, kg
    l_p: complex = 0.3302       # pendulum length, m
    g: complex = 9.8            # gravitational acceleration, m/s^2
    r_mp: complex = 6.35e-3     # motor pinion radius, m
    R_m: complex = 2.6          # motor armature resistance, ohm
    B_p: complex = 0.0024       # viscous damping at the pendulum hinge, N m s/rad
    B_c: complex = 5.4          # viscous damping on the motor pinion, N m s/rad
    K_g: complex = 3.71         # gear ratio
    K_m: complex = 7.67e-3      # back-EMF constant, V s/rad
    K_t: complex = 7.67e-3      # motor torque constant, N m/A
    J_m: complex = 3.90e-7      # rotational inertia of the motor shaft, kg m^2
    J_p: complex = 3.344e-2     # pendulum inertia at the hinge, kg m^2 (no model uses it)

    def value(self, k: int) -> complex:
        """Parameter number `k` in table order."""
        return getattr(self, PARAM_NAMES[k])

    def perturbed(self, k: int, delta: complex) -> "PhysicalParams":
        """Copy with parameter `k` shifted by `delta` (real or imaginary)."""
        name = PARAM_NAMES[k]
        return replace(self, **{name: getattr(self, name) + delta})
