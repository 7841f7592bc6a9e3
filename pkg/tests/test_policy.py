import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cartpole_lab.policy import (ARCH, GaussianHead, MlpPolicy, V_SCALE,
                                 action_voltage, deterministic_voltage,
                                 forward, init_policy, relu_complex,
                                 sample_action, softplus)

SOFTPLUS_AT_ZERO = 0.6931471805599453    # ln 2


def zero_policy():
    return MlpPolicy(W1=np.zeros((36, 4)), b1=np.zeros(36),
                     W2=np.zeros((10, 36)), b2=np.zeros(10),
                     W_m=np.zeros(10), b_m=0.0, W_s=np.zeros(10), b_s=0.0)


def straight_line_voltage(pol, z):
    """Independent re-implementation of the deployed controller: scalar
    loops, no shared code with the package's forward pass."""
    h1 = []
    for i in range(36):
        acc = pol.b1[i]
        for j in range(4):
            acc += pol.W1[i, j] * z[j]
        h1.append(acc if acc > 0 else 0.0)
    h2 = []
    for i in range(10):
        acc = pol.b2[i]
        for j in range(36):
            acc += pol.W2[i, j] * h1[j]
        h2.append(acc if acc > 0 else 0.0)
    mu = pol.b_m
    for i in range(10):
        mu += pol.W_m[i] * h2[i]
    return 10.0 * max(-1.0, min(1.0, mu))


def test_architecture_shapes(small_policy):
    assert ARCH == (4, 36, 10, 2)
    assert small_policy.W1.shape == (36, 4)
    assert small_policy.b1.shape == (36,)
    assert small_policy.W2.shape == (10, 36)
    assert small_policy.b2.shape == (10,)
    assert small_policy.W_m.shape == (10,)
    assert small_policy.W_s.shape == (10,)


def test_init_bounds_and_determinism():
    a = init_policy(99)
    b = init_policy(99)
    assert np.array_equal(a.W1, b.W1) and a.b_m == b.b_m
    assert np.max(np.abs(a.W1)) <= 1.0 / math.sqrt(4)
    assert np.max(np.abs(a.W2)) <= 1.0 / math.sqrt(36)
    assert np.max(np.abs(a.W_m)) <= 1.0 / math.sqrt(10)


def test_zero_policy_head():
    head = forward(zero_policy(), np.array([0.3, -0.1, 0.2, 0.05]))
    assert head.mu == 0.0
    assert head.sigma == pytest.approx(SOFTPLUS_AT_ZERO + 1e-6, abs=1e-12)


def test_mean_head_linearity(small_policy, rng):
    z = rng.uniform(-1, 1, 4)
    mu1 = forward(small_policy, z).mu
    doubled = replace(small_policy, W_m=2.0 * small_policy.W_m, b_m=2.0 * small_policy.b_m)
    mu2 = forward(doubled, z).mu
    assert mu2 == pytest.approx(2.0 * mu1, rel=1e-14, abs=1e-15)


def test_forward_matches_straight_line_oracle(rng):
    for seed in range(5):
        pol = init_policy(seed)
        for _ in range(20):
            z = rng.uniform(-2, 2, 4)
            assert deterministic_voltage(pol, z) == pytest.approx(
                straight_line_voltage(pol, z), abs=1e-14)


def test_voltage_clipping():
    pol = zero_policy()
    assert deterministic_voltage(pol, np.zeros(4)) == 0.0
    hot = replace(pol, b_m=1.4)
    assert deterministic_voltage(hot, np.zeros(4)) == 10.0
    cold = replace(pol, b_m=-1.4)
    assert deterministic_voltage(cold, np.zeros(4)) == -10.0


def test_action_voltage_normalisation():
    assert action_voltage(0.3) == pytest.approx(3.0)
    assert action_voltage(1.7) == 10.0
    assert action_voltage(-1.7) == -10.0


def test_relu_complex_gate():
    assert relu_complex(complex(3.0, 0.001)) == complex(3.0, 0.001)
    assert relu_complex(complex(-2.0, 0.001)) == 0.0
    assert relu_complex(0.0) == 0.0
    arr = relu_complex(np.array([1 + 2j, -1 + 2j, 0j]))
    assert np.array_equal(arr, np.array([1 + 2j, 0j, 0j]))


def test_complex_zero_imag_reproduces_real(small_policy, rng):
    for _ in range(50):
        z = rng.uniform(-1.5, 1.5, 4)
        fr = forward(small_policy, z)
        fc = forward(small_policy, z.astype(complex))
        assert fr.mu == complex(fc.mu).real and complex(fc.mu).imag == 0.0
        assert fr.sigma == complex(fc.sigma).real
        vr = deterministic_voltage(small_policy, z)
        vc = complex(deterministic_voltage(small_policy, z.astype(complex)))
        assert vr == vc.real and vc.imag == 0.0


def test_complex_saturation_zeroes_derivative():
    hot = replace(zero_policy(), b_m=1.4)
    v = deterministic_voltage(hot, np.array([0.1, 0, 0, 0], dtype=complex) + 1e-8j)
    assert v == 10.0


def test_logp_standard_normal_at_zero():
    # rig sigma = 1 and the draw a_raw = 0; density is the standard normal's
    raw = math.log(math.expm1(1.0 - 1e-6))
    pol = replace(zero_policy(), b_s=raw)

    class FixedRng:
        def normal(self, mu, sigma):
            return 0.0

    a, logp = sample_action(pol, np.zeros(4), FixedRng())
    assert a == 0.0
    assert logp == pytest.approx(-0.91894, abs=1e-5)


def test_sample_action_seeded_determinism(small_policy):
    z = np.array([0.02, 0.0, -0.03, 0.0])
    a1, l1 = sample_action(small_policy, z, np.random.default_rng(5))
    a2, l2 = sample_action(small_policy, z, np.random.default_rng(5))
    assert (a1, l1) == (a2, l2)


def test_sample_action_logp_consistent(small_policy, rng):
    z = rng.uniform(-1, 1, 4)
    mu, sigma = forward(small_policy, z)
    a, logp = sample_action(small_policy, z, np.random.default_rng(3))
    expect = (-0.5 * math.log(2 * math.pi) - math.log(sigma)
              - (a - mu) ** 2 / (2 * sigma ** 2))
    assert logp == pytest.approx(expect, rel=1e-14)


def test_sample_mean_converges():
    pol = zero_policy()
    tuned = replace(pol, b_m=0.3, b_s=math.log(math.expm1(0.5)))  # sigma = 0.5
    mu, sigma = forward(tuned, np.zeros(4))
    assert mu == pytest.approx(0.3, abs=1e-12)
    assert sigma == pytest.approx(0.5, abs=2e-6)
    rng = np.random.default_rng(11)
    draws = np.array([sample_action(tuned, np.zeros(4), rng)[0] for _ in range(100_000)])
    assert draws.mean() == pytest.approx(0.3, abs=0.01)


@given(st.floats(-30, 30))
@settings(max_examples=80, deadline=None)
def test_softplus_positive_and_monotone_slope(x):
    y = softplus(x)
    assert y > 0.0
    c = softplus(complex(x, 1e-9))
    assert c.real == y
    slope = c.imag / 1e-9
    assert 0.0 <= slope <= 1.0


@given(st.tuples(*[st.floats(-1, 1) for _ in range(4)]))
@settings(max_examples=60, deadline=None)
def test_sigma_always_positive(zt):
    pol = init_policy(13)
    head = forward(pol, np.array(zt))
    assert head.sigma >= 1e-6
    assert isinstance(head, GaussianHead)


def test_piecewise_affine_along_segment(small_policy):
    # a short segment that keeps every pre-activation sign fixed: outputs
    # must be collinear in the interpolation parameter
    z0 = np.array([0.05, 0.0, 0.03, 0.0])
    direction = np.array([1e-4, -2e-4, 1e-4, 3e-4])
    ts = np.linspace(0.0, 1.0, 7)
    vs = [deterministic_voltage(small_policy, z0 + t * direction) for t in ts]
    slopes = np.diff(vs) / np.diff(ts)
    assert np.max(np.abs(slopes - slopes[0])) <= 1e-9 * max(1.0, abs(slopes[0]))
