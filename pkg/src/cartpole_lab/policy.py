"""Gaussian control policy: a 4-36-10 ReLU trunk with mean and std heads.

The network outputs a normalised mean (volts / 10) and a standard deviation
for the action distribution. Deployment uses only the mean head, scaled by
10 and saturated at the +-10 V motor limit, which makes the deployed
controller a piecewise affine function of the state.

Complex states are supported for derivative probes: matrix products are
evaluated on real and imaginary parts separately with the same kernels as
the real pass, and ReLU/saturation gate on the real part.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .scalars import clip_by_real

ARCH = (4, 36, 10, 2)
V_SCALE = 10.0        # volts per unit of normalised mean
SIGMA_FLOOR = 1e-6

_LN_2PI = math.log(2.0 * math.pi)


@dataclass
class MlpPolicy:
    W1: np.ndarray      # (36, 4)
    b1: np.ndarray      # (36,)
    W2: np.ndarray      # (10, 36)
    b2: np.ndarray      # (10,)
    W_m: np.ndarray     # (10,) mean head
    b_m: float
    W_s: np.ndarray     # (10,) std head
    b_s: float


class GaussianHead(NamedTuple):
    mu: float
    sigma: float


def init_policy(seed) -> MlpPolicy:
    """Fresh policy with per-layer uniform(-1/sqrt(fan_in), +1/sqrt(fan_in))."""
    rng = np.random.default_rng(seed)

    def u(fan_in, *shape):
        bound = 1.0 / math.sqrt(fan_in)
        return rng.uniform(-bound, bound, shape)

    return MlpPolicy(
        W1=u(4, 36, 4), b1=u(4, 36),
        W2=u(36, 10, 36), b2=u(36, 10),
        W_m=u(10, 10), b_m=float(u(10)),
        W_s=u(10, 10), b_s=float(u(10)),
    )


def relu_complex(x):
    """ReLU gated on the real part; a closed gate zeroes both parts."""
    if np.ndim(x) == 0:
        return x if x.real > 0.0 else 0.0
    return np.where(np.real(x) > 0.0, x, 0.0)


def softplus(x):
    """Stable log(1 + e^x). Complex arguments carry the slope (the logistic
    function) on the imaginary part; exact for zero imaginary part."""
    if isinstance(x, complex):
        return complex(softplus(x.real), x.imag / (1.0 + math.exp(-x.real)))
    if x > 0.0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


def _split(x):
    """Contiguous real/imaginary copies; strided views hit different BLAS
    accumulation paths and can be off by an ulp."""
    return np.ascontiguousarray(x.real), np.ascontiguousarray(x.imag)


def _affine_c(W, b, x):
    """W x + b for complex x, with real/imaginary parts run through the same
    matvec kernel the real pass uses."""
    re, im = _split(x)
    out = np.empty(W.shape[0], dtype=complex)
    out.real = W @ re + b
    out.imag = W @ im
    return out


def _trunk(policy: MlpPolicy, z):
    z = np.asarray(z)
    if np.iscomplexobj(z):
        h1 = relu_complex(_affine_c(policy.W1, policy.b1, z))
        return relu_complex(_affine_c(policy.W2, policy.b2, h1))
    h1 = np.maximum(policy.W1 @ z + policy.b1, 0.0)
    return np.maximum(policy.W2 @ h1 + policy.b2, 0.0)


def forward(policy: MlpPolicy, z) -> GaussianHead:
    """Normalised action mean and standard deviation at state z."""
    h2 = _trunk(policy, z)
    if np.iscomplexobj(h2):
        re, im = _split(h2)
        mu = complex(policy.W_m @ re + policy.b_m, policy.W_m @ im)
        raw = complex(policy.W_s @ re + policy.b_s, policy.W_s @ im)
    else:
        mu = float(policy.W_m @ h2 + policy.b_m)
        raw = float(policy.W_s @ h2 + policy.b_s)
    return GaussianHead(mu, softplus(raw) + SIGMA_FLOOR)


def deterministic_voltage(policy: MlpPolicy, z):
    """Deployment controller: 10 * mean, saturated to [-10, 10] volts."""
    h2 = _trunk(policy, z)
    if np.iscomplexobj(h2):
        re, im = _split(h2)
        mu = complex(policy.W_m @ re + policy.b_m, policy.W_m @ im)
    else:
        mu = float(policy.W_m @ h2 + policy.b_m)
    return clip_by_real(V_SCALE * mu, -V_SCALE, V_SCALE)


def action_voltage(a_norm: float) -> float:
    """Voltage sent to the motor for a normalised action sample."""
    return V_SCALE * min(max(a_norm, -1.0), 1.0)


def sample_action(policy: MlpPolicy, z, rng) -> tuple[float, float]:
    """Draw a normalised action and its log-density at the unclipped draw."""
    mu, sigma = forward(policy, z)
    a = rng.normal(mu, sigma)
    d = a - mu
    logp = -0.5 * _LN_2PI - math.log(sigma) - d * d / (2.0 * sigma * sigma)
    return a, logp
