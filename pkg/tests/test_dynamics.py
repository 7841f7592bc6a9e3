import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cartpole_lab.dynamics import (lab_denominator, lab_rhs, lti_matrices,
                                   lti_rhs, simplified_rhs)
from cartpole_lab.params import PARAM_NAMES, PhysicalParams

# expected values below were evaluated by hand from the nominal table
D_AT_UPRIGHT = 2.1018e-4
A_12 = 2.3979          # m_p g / m_c
A_32 = 36.941          # (m_c + m_p) g / (m_c l_p)
B_1 = 1.8337           # K_g K_t / (R_m r_mp m_c)
ALPHA_DDOT_HORIZONTAL = 29.679   # g / l_p, diagonal mass matrix at alpha = pi/2


def test_nominal_table_positive(nominal):
    for name in PARAM_NAMES:
        assert getattr(nominal, name).real > 0.0


def test_equilibrium_lab(nominal):
    dz = lab_rhs(np.zeros(4), nominal, 0.0)
    assert np.max(np.abs(dz)) <= 1e-12


def test_equilibrium_lti(nominal):
    dz = lti_rhs(np.zeros(4), nominal, 0.0)
    assert np.max(np.abs(dz)) <= 1e-12


def test_equilibrium_simplified(nominal):
    dz = simplified_rhs(np.zeros(4), nominal, 0.0)
    assert np.max(np.abs(dz)) <= 1e-12


def test_shared_denominator_at_upright(nominal):
    assert lab_denominator(0.0, nominal) == pytest.approx(D_AT_UPRIGHT, abs=1e-8)


def test_velocity_passthrough(nominal, rng):
    for _ in range(20):
        z = rng.uniform(-2, 2, 4)
        v = rng.uniform(-10, 10)
        for fn in (lab_rhs, simplified_rhs, lti_rhs):
            dz = fn(z, nominal, v)
            assert dz[0] == z[1]
            assert dz[2] == z[3]


@pytest.mark.parametrize("fn", [lab_rhs, simplified_rhs, lti_rhs])
def test_odd_symmetry_100_points(fn, nominal, rng):
    for _ in range(100):
        z = rng.uniform(-3, 3, 4)
        v = rng.uniform(-10, 10)
        plus = fn(z, nominal, v)
        minus = fn(-z, nominal, -v)
        assert np.max(np.abs(plus + minus)) <= 1e-12 * max(1.0, np.max(np.abs(plus)))


@pytest.mark.parametrize("fn", [lab_rhs, simplified_rhs])
def test_two_pi_periodic_in_angle(fn, nominal, rng):
    for _ in range(50):
        z = rng.uniform(-2, 2, 4)
        v = rng.uniform(-5, 5)
        shifted = z.copy()
        shifted[2] += 2.0 * np.pi
        a = fn(z, nominal, v)
        b = fn(shifted, nominal, v)
        assert np.max(np.abs(a - b)) <= 1e-9 * max(1.0, np.max(np.abs(a)))


def test_lti_entries(nominal):
    sys = lti_matrices(nominal)
    assert sys.A[1, 2] == pytest.approx(A_12, rel=1e-4)
    assert sys.A[3, 2] == pytest.approx(A_32, rel=1e-3)
    assert sys.B[1] == pytest.approx(B_1, rel=1e-4)


def test_lti_structure(nominal):
    sys = lti_matrices(nominal)
    assert np.array_equal(sys.A[0], [0, 1, 0, 0])
    assert np.array_equal(sys.A[2], [0, 0, 0, 1])
    assert np.all(sys.A[:, 0] == 0)
    assert sys.B[0] == 0 and sys.B[2] == 0


def test_lti_position_invariance(nominal):
    dz = lti_rhs(np.array([0.1, 0.0, 0.0, 0.0]), nominal, 0.0)
    assert np.max(np.abs(dz)) == 0.0


def test_lti_linearity_100_points(nominal, rng):
    for _ in range(100):
        z1, z2 = rng.uniform(-2, 2, 4), rng.uniform(-2, 2, 4)
        v1, v2 = rng.uniform(-5, 5, 2)
        lhs = lti_rhs(z1 + z2, nominal, v1 + v2)
        rhs = lti_rhs(z1, nominal, v1) + lti_rhs(z2, nominal, v2)
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_lti_jacobian_matches_matrix(nominal, rng):
    sys = lti_matrices(nominal)
    z = rng.uniform(-1, 1, 4)
    eps = 1e-6
    jac = np.empty((4, 4))
    for j in range(4):
        zp, zm = z.copy(), z.copy()
        zp[j] += eps
        zm[j] -= eps
        jac[:, j] = (lti_rhs(zp, nominal, 0.3) - lti_rhs(zm, nominal, 0.3)) / (2 * eps)
    assert np.allclose(jac, sys.A, rtol=1e-8, atol=1e-8)


def test_simplified_diagonal_case(nominal):
    dz = simplified_rhs(np.array([0.0, 0.0, np.pi / 2, 0.0]), nominal, 0.0)
    assert dz[1] == pytest.approx(0.0, abs=1e-12)
    assert dz[3] == pytest.approx(ALPHA_DDOT_HORIZONTAL, abs=1e-3)


def test_simplified_singular_matrix_raises(nominal):
    from dataclasses import replace
    broken = replace(nominal, m_c=-nominal.m_p)   # makes det <= 0 at alpha = 0
    with pytest.raises(ValueError, match="singular"):
        simplified_rhs(np.zeros(4), broken, 0.0)


@pytest.mark.parametrize("fn", [lab_rhs, simplified_rhs, lti_rhs])
def test_complex_with_zero_imag_matches_real(fn, nominal, rng):
    for _ in range(100):
        z = rng.uniform(-3, 3, 4)
        v = rng.uniform(-10, 10)
        real = fn(z, nominal, v)
        comp = fn(z.astype(complex), nominal, complex(v))
        assert np.array_equal(real, comp.real)
        assert np.all(comp.imag == 0.0)


@given(st.floats(-50, 50), st.floats(-50, 50))
@settings(max_examples=50, deadline=None)
def test_scalar_trig_complex_agrees_with_real(a, b):
    from cartpole_lab import scalars
    assert scalars.sin(complex(a, 0.0)).real == scalars.sin(a)
    assert scalars.cos(complex(a, 0.0)).real == scalars.cos(a)
    # derivative carried by the imaginary part
    h = 1e-9
    ds = scalars.sin(complex(a, h)).imag / h
    assert ds == pytest.approx(scalars.cos(a), abs=1e-6)


@given(st.floats(-20, 20, allow_nan=False))
@settings(max_examples=50, deadline=None)
def test_clip_by_real_band(x):
    from cartpole_lab.scalars import clip_by_real
    out = clip_by_real(x, -10.0, 10.0)
    assert -10.0 <= out <= 10.0
    if -10.0 <= x <= 10.0:
        assert out == x


def test_finite_outputs_on_finite_inputs(nominal, rng):
    for _ in range(50):
        z = rng.uniform(-10, 10, 4)
        v = rng.uniform(-10, 10)
        assert np.all(np.isfinite(lab_rhs(z, nominal, v)))
        assert np.all(np.isfinite(lti_rhs(z, nominal, v)))
