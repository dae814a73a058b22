"""Fock-space primitives: operators, squeezed vacua, X-states.

Expected values were frozen from hand evaluation of the closed forms
(independent of the implementation): squeezed-vacuum amplitudes
c_{2m} = sqrt((2m)!)/(m! 2^m) (-tanh r e^{i theta})^m / sqrt(cosh r),
pair overlap 1/sqrt(cosh 2r), X-state populations 4 N^2 |c_{2m}|^2.
"""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ionsqueeze import fock
from ionsqueeze.errors import TruncationError
from ionsqueeze.fock import (
    MotionalState,
    PhasePoint,
    SqueezeParam,
    displacement_op,
    fock_state,
    inner_product,
    ladder_ops,
    min_dim_for_squeeze,
    momentum_op,
    position_op,
    squeeze_op,
    squeezed_pair_overlap,
    squeezed_state_analytic,
    squeezed_tail_probability,
    unitarity_defect,
    vacuum,
    x_state,
    x_state_norm,
)


def test_ladder_commutator_away_from_boundary():
    a, adag = ladder_ops(32)
    comm = a @ adag - adag @ a
    # truncation corrupts only the last diagonal entry
    assert np.max(np.abs(comm[:-1, :-1] - np.eye(31))) < 1e-13
    assert comm[-1, -1] == pytest.approx(-31.0)


def test_quadrature_commutator():
    x, p = position_op(48), momentum_op(48)
    comm = x @ p - p @ x
    assert np.max(np.abs(comm[:-1, :-1] - 1j * np.eye(47))) < 1e-13


@pytest.mark.parametrize("dim", [0, 1, -3])
def test_dim_below_two_rejected(dim):
    with pytest.raises(ValueError):
        ladder_ops(dim)
    with pytest.raises(ValueError):
        vacuum(dim)


def test_squeeze_param_validation():
    with pytest.raises(ValueError):
        SqueezeParam(-0.1)
    assert SqueezeParam(1.0, 2 * math.pi + 0.5).theta == pytest.approx(0.5)
    assert SqueezeParam(0.5, -0.5).theta == pytest.approx(2 * math.pi - 0.5)
    assert SqueezeParam(2.0, math.pi).xi == pytest.approx(-2.0)


def test_phase_point_alpha():
    assert PhasePoint(0.3, -1.2).alpha == 0.3 - 1.2j


def test_state_norm_enforced():
    with pytest.raises(ValueError):
        MotionalState([0.5, 0.5])
    st_ = MotionalState([3.0, 4.0], normalize=True)
    assert st_.norm() == pytest.approx(1.0)
    assert st_.amplitudes[1] == pytest.approx(0.8)


def test_state_json_roundtrip():
    st_ = squeezed_state_analytic(SqueezeParam(0.7, 1.1), 64)
    back = MotionalState.from_json(st_.to_json())
    assert np.array_equal(back.amplitudes, st_.amplitudes)
    rec = json.loads(st_.to_json())
    assert set(rec) == {"dim", "re", "im"} and rec["dim"] == 64


def test_inner_product_conjugates_left():
    a = MotionalState([1.0, 1.0j], normalize=True)
    b = MotionalState([1.0, 0.0])
    assert inner_product(a, b) == pytest.approx(np.conj(inner_product(b, a)))
    assert inner_product(a, a) == pytest.approx(1.0)


# --- squeezed vacuum -----------------------------------------------------

# hand-evaluated series amplitudes at r=1, theta=0
C0_R1 = 0.8050181821945921
C2_R1 = -0.43352514733965514
C4_R1 = 0.2859357969445248
C6_R1 = -0.19879319278305457


def test_squeezed_amplitudes_match_frozen_series():
    st_ = squeezed_state_analytic(SqueezeParam(1.0), 128)
    amps = st_.amplitudes
    for n, want in [(0, C0_R1), (2, C2_R1), (4, C4_R1), (6, C6_R1)]:
        assert amps[n] == pytest.approx(want, abs=1e-12)
    assert np.all(amps[1::2] == 0)


def test_squeezed_theta_phases():
    st_ = squeezed_state_analytic(SqueezeParam(1.0, 0.7), 128)
    # c_{2m} carries exp(i m (theta + pi)); m=1 term
    assert np.angle(st_.amplitudes[2]) % (2 * math.pi) == pytest.approx(0.7 + math.pi, abs=1e-12)
    assert np.angle(st_.amplitudes[4]) % (2 * math.pi) == pytest.approx(2 * 0.7, abs=1e-12)


@pytest.mark.parametrize("r,dim", [(0.25, 64), (0.5, 64), (1.0, 192)])
def test_squeeze_op_matches_series(r, dim):
    for theta in (0.0, math.pi / 2, math.pi):
        got = squeeze_op(SqueezeParam(r, theta), dim) @ vacuum(dim).amplitudes
        want = squeezed_state_analytic(SqueezeParam(r, theta), dim).amplitudes
        assert np.max(np.abs(got - want)) < 1e-9


def test_mean_phonon_is_sinh_squared():
    for r in (0.3, 1.0, 1.5):
        st_ = squeezed_state_analytic(SqueezeParam(r), min_dim_for_squeeze(r, 1e-14))
        assert st_.mean_phonon() == pytest.approx(math.sinh(r) ** 2, rel=1e-10)


def test_tail_rule_raises():
    # at r=2.5 a 256-level ladder leaves ~1e-2 of the norm out
    assert squeezed_tail_probability(2.5, 256) > 1e-3
    with pytest.raises(TruncationError):
        squeezed_state_analytic(SqueezeParam(2.5), 256)


def test_min_dim_honors_tail_bound():
    for r in (0.5, 1.0, 2.0):
        dim = min_dim_for_squeeze(r, 1e-10)
        assert squeezed_tail_probability(r, dim) <= 1e-10
        assert squeezed_tail_probability(r, dim - 16) > 1e-10
        # bound really bounds: direct series sum of the retained part
        st_ = squeezed_state_analytic(SqueezeParam(r), dim)
        assert 1.0 - st_.norm() ** 2 <= squeezed_tail_probability(r, dim) + 1e-15


def test_squeeze_unitarity_protected_block():
    u = squeeze_op(SqueezeParam(1.0, 0.4), 128)
    assert unitarity_defect(u, protected_fraction=0.1) < 1e-10
    # inverse by phase shift theta -> theta + pi
    v = squeeze_op(SqueezeParam(1.0, 0.4 + math.pi), 128)
    prod = v @ u
    assert np.max(np.abs(prod[:96, :96] - np.eye(96))) < 1e-9


def test_displacement_coherent_amplitudes():
    alpha = 0.6 - 0.45j
    dim = 48
    got = displacement_op(alpha, dim) @ vacuum(dim).amplitudes
    n = np.arange(dim)
    want = np.exp(-abs(alpha) ** 2 / 2) * alpha**n / np.sqrt(
        np.array([math.factorial(int(k)) for k in n], dtype=float)
    )
    assert np.max(np.abs(got - want)) < 1e-11


def test_displacement_unitary_and_inverse():
    d = displacement_op(PhasePoint(1.0, -0.5), 96)
    assert unitarity_defect(d, protected_fraction=0.1) < 1e-10
    dinv = displacement_op(-1.0 + 0.5j, 96)
    prod = dinv @ d
    assert np.max(np.abs(prod[:64, :64] - np.eye(64))) < 1e-10


# --- X-states ------------------------------------------------------------

# populations of |X_-(r=1)> at n=2, 6, 10 from 4 N_-^2 |c_{2m}|^2
XM_P2 = 0.7759231142473135
XM_P6 = 0.1631522690674621
XM_P10 = 0.04322530756011889
# populations of |X_+(r=1)> at n=0, 4, 8
XP_P0 = 0.8552010159635668
XP_P4 = 0.1078931536137604
XP_P8 = 0.0264676330983377


def test_x_state_support_and_populations():
    dim = 192
    xp = x_state("even", 1.0, dim)
    xm = x_state("odd", 1.0, dim)
    assert xp.norm() == pytest.approx(1.0, abs=1e-10)
    assert xm.norm() == pytest.approx(1.0, abs=1e-10)
    pp, pm = xp.phonon_distribution(), xm.phonon_distribution()
    n = np.arange(dim)
    assert np.max(pp[n % 4 != 0]) < 1e-24
    assert np.max(pm[n % 4 != 2]) < 1e-24
    assert pm[2] == pytest.approx(XM_P2, abs=1e-10)
    assert pm[6] == pytest.approx(XM_P6, abs=1e-10)
    assert pm[10] == pytest.approx(XM_P10, abs=1e-10)
    assert pp[0] == pytest.approx(XP_P0, abs=1e-10)
    assert pp[4] == pytest.approx(XP_P4, abs=1e-10)
    assert pp[8] == pytest.approx(XP_P8, abs=1e-10)


def test_x_minus_orthogonal_to_vacuum():
    xm = x_state("odd", 1.0, 192)
    assert abs(inner_product(vacuum(192), xm)) == 0.0


def test_x_states_have_even_photon_parity():
    # both superpositions live on even n, so <(-1)^n> = +1 for each
    assert x_state("even", 1.0, 192).parity_expectation() == pytest.approx(1.0, abs=1e-12)
    assert x_state("odd", 1.0, 192).parity_expectation() == pytest.approx(1.0, abs=1e-12)


def test_pair_overlap_matches_constructed_states():
    for r, dim, tol in [(0.5, 64, 1e-12), (1.0, 192, 1e-12), (2.0, 1024, 1e-9)]:
        sa = squeezed_state_analytic(SqueezeParam(r, 0.0), dim, tail_tol=1e-9)
        sb = squeezed_state_analytic(SqueezeParam(r, math.pi), dim, tail_tol=1e-9)
        ov = inner_product(sa, sb)
        assert abs(ov.imag) < tol
        assert ov.real == pytest.approx(squeezed_pair_overlap(r), abs=tol)


def test_x_state_norm_values():
    assert x_state_norm("even", 1.0) == pytest.approx(1 / math.sqrt(2 + 2 * 0.5155601117562139), abs=1e-12)
    assert x_state_norm("odd", 1.0) == pytest.approx(1 / math.sqrt(2 - 2 * 0.5155601117562139), abs=1e-12)
    with pytest.raises(ValueError):
        x_state_norm("odd", 0.0)
    with pytest.raises(ValueError):
        x_state_norm("sideways", 1.0)


def test_truncation_health_top_slice():
    st_ = squeezed_state_analytic(SqueezeParam(1.0), 192)
    assert st_.top_fraction_probability(0.05) < 1e-8


# --- property tests ------------------------------------------------------


@settings(max_examples=25, deadline=None)
@given(
    r=st.floats(0.0, 1.2),
    theta=st.floats(0.0, 2 * math.pi, exclude_max=True),
)
def test_squeeze_op_unitary_property(r, theta):
    u = squeeze_op(SqueezeParam(r, theta), 96)
    assert unitarity_defect(u, protected_fraction=0.1) < 1e-9


@settings(max_examples=25, deadline=None)
@given(r=st.floats(0.05, 1.2), theta=st.floats(0.0, 2 * math.pi, exclude_max=True))
def test_squeezed_vacuum_even_support_property(r, theta):
    st_ = squeezed_state_analytic(SqueezeParam(r, theta), 160, tail_tol=1e-8)
    assert np.all(st_.amplitudes[1::2] == 0)
    assert abs(st_.norm() - 1.0) < 1e-8


def test_fock_state_bounds():
    with pytest.raises(ValueError):
        fock_state(64, 64)
    assert fock.fock_state(3, 8).phonon_distribution()[3] == 1.0
