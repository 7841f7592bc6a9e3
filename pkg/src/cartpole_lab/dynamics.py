"""Right-hand sides of the three cart-pole models.

State ordering everywhere is z = (x, xdot, alpha, alphadot) with x the cart
position (m, zero at track centre) and alpha the pendulum angle (rad, zero
upright, counterclockwise positive).

All functions are pure. They accept real or complex entries and avoid any
operation whose real part could differ between the two instantiations, so a
complex run with zero imaginary parts reproduces the real run exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import scalars
from .params import PhysicalParams


def lab_rhs(z, p: PhysicalParams, v_m):
    """Detailed bench model: motor, gearing and viscous damping included.

    Both acceleration rows share the denominator
    D = 4 (m_c + m_p) r_mp^2 + 4 J_m K_g^2 + 3 m_p r_mp^2 sin^2(alpha),
    computed once per call.
    """
    z2 = scalars.as_scalar(z[1])
    z3 = scalars.as_scalar(z[2])
    z4 = scalars.as_scalar(z[3])
    v_m = scalars.as_scalar(v_m)
    s3 = scalars.sin(z3)
    c3 = scalars.cos(z3)
    rmp2 = p.r_mp * p.r_mp
    kg2 = p.K_g * p.K_g
    D = 4.0 * (p.m_c + p.m_p) * rmp2 + 4.0 * p.J_m * kg2 + 3.0 * p.m_p * rmp2 * s3 * s3
    drag = p.R_m * rmp2 * p.B_c + kg2 * p.K_t * p.K_m   # velocity drag, motor + rail
    inert = (p.m_c + p.m_p) * rmp2 + p.J_m * kg2
    dz2 = (-3.0 * rmp2 * p.B_p * c3 * z4 / (p.l_p * D)
           - 4.0 * p.m_p * p.l_p * rmp2 * s3 * z4 * z4 / D
           - 4.0 * drag * z2 / (p.R_m * D)
           + 3.0 * p.m_p * rmp2 * p.g * c3 * s3 / D
           + 4.0 * p.r_mp * p.K_g * p.K_t * v_m / (p.R_m * D))
    dz4 = (-3.0 * inert * p.B_p * z4 / (p.m_p * p.l_p * p.l_p * D)
           - 3.0 * p.m_p * rmp2 * c3 * s3 * z4 * z4 / D
           - 3.0 * drag * c3 * z2 / (p.R_m * p.l_p * D)
           + 3.0 * inert * p.g * s3 / (p.l_p * D)
           + 3.0 * rmp2 * c3 * p.K_g * p.K_t * v_m / (p.R_m * p.l_p * D))
    return np.array([z2, dz2, z4, dz4])


def lab_denominator(z3, p: PhysicalParams):
    """Shared denominator of the bench model's acceleration rows."""
    s3 = scalars.sin(z3)
    rmp2 = p.r_mp * p.r_mp
    return (4.0 * (p.m_c + p.m_p) * rmp2 + 4.0 * p.J_m * p.K_g * p.K_g
            + 3.0 * p.m_p * rmp2 * s3 * s3)


def simplified_rhs(z, p: PhysicalParams, f_c):
    """Damping- and rotor-free intermediate model.

    The input is a horizontal force on the cart in newtons, not a motor
    voltage. The 2x2 mass matrix is inverted in closed form.
    """
    z2 = scalars.as_scalar(z[1])
    z3 = scalars.as_scalar(z[2])
    z4 = scalars.as_scalar(z[3])
    f_c = scalars.as_scalar(f_c)
    s3 = scalars.sin(z3)
    c3 = scalars.cos(z3)
    # mass matrix [[m_c + m_p, -m_p l_p c3], [-c3, l_p]]
    det = (p.m_c + p.m_p) * p.l_p - p.m_p * p.l_p * c3 * c3
    if det.real <= 0.0:
        raise ValueError(f"singular mass matrix at alpha={z3!r}: det={det!r}")
    r1 = f_c - p.m_p * p.l_p * s3 * z4 * z4
    r2 = p.g * s3
    dz2 = (p.l_p * r1 + p.m_p * p.l_p * c3 * r2) / det
    dz4 = (c3 * r1 + (p.m_c + p.m_p) * r2) / det
    return np.array([z2, dz2, z4, dz4])


@dataclass(frozen=True)
class LtiSystem:
    """Linear model zdot = A z + B v_m about the upright equilibrium."""

    A: np.ndarray   # 4x4
    B: np.ndarray   # length 4


def lti_matrices(p: PhysicalParams) -> LtiSystem:
    """Entries of the linearised, damping-free, rotor-free model."""
    drag = p.K_g * p.K_g * p.K_t * p.K_m / (p.R_m * p.r_mp * p.r_mp * p.m_c)
    gain = p.K_g * p.K_t / (p.R_m * p.r_mp * p.m_c)
    A = np.array([
        [0.0, 1.0, 0.0, 0.0],
        [0.0, -drag, p.m_p * p.g / p.m_c, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, -drag / p.l_p, (p.m_c + p.m_p) * p.g / (p.m_c * p.l_p), 0.0],
    ])
    B = np.array([0.0, gain, 0.0, gain / p.l_p])
    return LtiSystem(A, B)


def lti_matvec(A, z):
    """A @ z, splitting complex operands into real matvecs so that zero
    imaginary parts reproduce the purely real product bit for bit."""
    if not (np.iscomplexobj(A) or np.iscomplexobj(z)):
        return A @ z
    A = np.asarray(A, dtype=complex)
    z = np.ascontiguousarray(np.asarray(z, dtype=complex))
    Ar, Ai = np.ascontiguousarray(A.real), np.ascontiguousarray(A.imag)
    zr, zi = np.ascontiguousarray(z.real), np.ascontiguousarray(z.imag)
    out = np.empty(A.shape[0], dtype=complex)
    out.real = Ar @ zr - Ai @ zi
    out.imag = Ar @ zi + Ai @ zr
    return out


def lti_rhs(z, p: PhysicalParams, v_m):
    """A z + B v_m with the matrices rebuilt from `p` on every call."""
    sys = lti_matrices(p)
    return lti_matvec(sys.A, np.asarray(z)) + sys.B * scalars.as_scalar(v_m)
