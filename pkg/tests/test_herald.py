from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dlcz.channel import ChannelParams, SymmetricParams
from dlcz.errors import ParameterError, UndefinedFidelityError
from dlcz.fock import combined_tail_bound, oracle_distribution, oracle_fidelity_arbitrary
from dlcz.herald import (
    NRPD,
    PNRD,
    DetectionScheme,
    fidelity_arbitrary,
    fidelity_moments,
    fidelity_product,
    fidelity_singlet_triplet,
    herald_report,
    heralding_probability,
    heralding_probability_exponent,
    heralding_probability_moments,
    optimal_state,
    optimal_state_coeffs,
    phase_averaged_fidelity,
    phase_averaged_fidelity_mc,
    success_probability,
    symmetric_fidelity,
    symmetric_heralding_probability,
    symmetric_success_probability,
)

from conftest import channel_params, phases, random_channel, random_qubit

SCHEMES = (PNRD, NRPD)
R2 = 1 / math.sqrt(2)


def sym(p_c: float, eta_s: float, theta: float = 0.0) -> ChannelParams:
    return SymmetricParams(p_c, eta_s, theta).to_channel()


def oracle_tolerance(cp: ChannelParams, p: float, n_max: int = 12) -> float:
    # F = (FP)/P with both numerator and P off by at most the tail mass
    return 2 * combined_tail_bound((cp.p_cL, cp.p_cR), n_max) / p + 1e-10


def test_scheme_parse():
    assert DetectionScheme.parse("pnrd") is PNRD
    assert DetectionScheme.parse(NRPD) is NRPD
    with pytest.raises(ParameterError):
        DetectionScheme.parse("APD")


@pytest.mark.parametrize("s", SCHEMES)
def test_symmetric_heralding_matches_oracle(s):
    cp = sym(0.01, 1.0)
    ref = oracle_distribution(cp, s, n_max=12)
    for j in (1, 2):
        assert heralding_probability(cp, s, j) == pytest.approx(ref.P1, abs=1e-10)
    assert ref.P1 == pytest.approx({PNRD: 0.009801, NRPD: 0.0099}[s], abs=1e-10)


@pytest.mark.parametrize("s", SCHEMES)
def test_no_excitation_no_herald(s):
    cp = ChannelParams(0.0, 0.0, 0.4, 0.9, 0.7, 0.8, 0.1, 0.2)
    assert heralding_probability(cp, s, 1) == 0.0
    assert heralding_probability(cp, s, 2) == 0.0
    with pytest.raises(UndefinedFidelityError, match="herald impossible"):
        fidelity_singlet_triplet(cp, s, 1)
    rep = herald_report(cp, s)
    assert rep.F1 is None and rep.F_opt2 is None and rep.opt_coeffs is None


@pytest.mark.parametrize("s", SCHEMES)
def test_zero_detector_efficiency(s):
    cp = ChannelParams(0.1, 0.1, 0.5, 0.5, eta_1=0.0, eta_2=0.6)
    assert heralding_probability(cp, s, 1) == 0.0
    assert heralding_probability(cp, s, 2) > 0.0
    with pytest.raises(UndefinedFidelityError):
        fidelity_singlet_triplet(cp, s, 1)
    assert herald_report(cp, s).F1 is None


def test_lossless_fidelities():
    assert fidelity_singlet_triplet(sym(0.01, 1.0), PNRD, 1) == pytest.approx(1.0, abs=1e-14)
    assert fidelity_singlet_triplet(sym(0.01, 1.0), NRPD, 1) == pytest.approx(0.99, abs=1e-14)


@pytest.mark.parametrize("s", SCHEMES)
def test_vanishing_efficiency_fidelity(s):
    assert fidelity_singlet_triplet(sym(0.01, 1e-9), s, 2) == pytest.approx(0.99**3, abs=1e-8)
    assert 0.99**3 == pytest.approx(0.970299)


@pytest.mark.parametrize("s", SCHEMES)
def test_single_path_loading_matches_oracle(s):
    cp = ChannelParams(0.01, 0.0)
    f = fidelity_arbitrary(cp, s, 1, 1.0, 0.0)
    assert f == pytest.approx(oracle_fidelity_arbitrary(cp, s, 1, 1.0, 0.0), abs=1e-10)


@pytest.mark.parametrize("j", [1, 2])
def test_arbitrary_specializes_to_singlet(j):
    cp = ChannelParams(0.03, 0.05, 0.6, 0.4, 0.9, 0.8, 0.2, -0.4)
    for s in SCHEMES:
        assert fidelity_arbitrary(cp, s, j, R2, (-1) ** j * R2) == pytest.approx(
            fidelity_singlet_triplet(cp, s, j), abs=1e-15
        )


@settings(max_examples=100, deadline=None)
@given(channel_params(), st.sampled_from([1, 2]))
def test_orthogonal_to_optimal_is_zero(cp, j):
    d_L, d_R = optimal_state_coeffs(cp, j)
    for s in SCHEMES:
        assert fidelity_arbitrary(cp, s, j, -np.conj(d_R), np.conj(d_L)) == pytest.approx(0.0, abs=1e-14)


def test_unnormalized_target_rejected():
    with pytest.raises(ParameterError, match="normalized"):
        fidelity_arbitrary(sym(0.1, 0.5), PNRD, 1, 1.0, 1.0)


@pytest.mark.parametrize("j", [1, 2])
def test_optimal_state_symmetric(j):
    d_L, d_R = optimal_state_coeffs(sym(0.05, 0.3, 0.8), j)
    assert d_L == pytest.approx(R2, abs=1e-15)
    assert d_R == pytest.approx((-1) ** j * R2, abs=1e-15)


def test_optimal_state_weighting():
    cp = ChannelParams(0.03, 0.01, eta_L=0.5, eta_R=0.5)
    d_L, _, _ = optimal_state(cp, 1)
    assert abs(d_L) ** 2 == pytest.approx(0.75, abs=1e-14)


def test_optimal_state_dead_left_path():
    cp = ChannelParams(0.01, 0.01, eta_L=1e-9, eta_R=1.0)
    _, d_R, _ = optimal_state(cp, 1)
    assert abs(d_R) == pytest.approx(1.0, abs=1e-8)
    assert fidelity_singlet_triplet(cp, PNRD, 1) == pytest.approx(0.5, abs=0.02)


def test_optimal_state_requires_excitation():
    with pytest.raises(ParameterError, match="no excitation channel"):
        optimal_state_coeffs(ChannelParams(0.0, 0.1, eta_R=0.0), 1)


@settings(max_examples=200, deadline=None)
@given(channel_params(), st.sampled_from([1, 2]), st.sampled_from(SCHEMES))
def test_singlet_fidelity_is_projection_of_optimal(cp, j, s):
    d_L, d_R, f_opt = optimal_state(cp, j, s)
    overlap = abs(R2 * d_L + (-1) ** j * R2 * d_R) ** 2
    f = fidelity_singlet_triplet(cp, s, j)
    assert f == pytest.approx(overlap * f_opt, abs=1e-12)
    assert 0.0 <= f <= f_opt + 1e-15 <= 1.0 + 1e-15


def test_success_probability_examples():
    cp = sym(0.01, 0.05)
    assert success_probability(cp) == pytest.approx(2 * 0.05 * 0.01 * 0.99**2, rel=1e-13)
    assert oracle_distribution(cp, PNRD).P_success == pytest.approx(9.801e-4, abs=1e-10)
    assert success_probability(sym(0.0, 0.5)) == 0.0
    assert success_probability(sym(0.3, 0.0)) == 0.0


@settings(max_examples=200, deadline=None)
@given(channel_params(excited=False))
def test_success_probability_scheme_independent(cp):
    assert success_probability(cp, PNRD) == pytest.approx(success_probability(cp, NRPD), abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(channel_params(), st.sampled_from([1, 2]))
def test_fidelity_probability_product_scheme_invariant(cp, j):
    prods = [fidelity_singlet_triplet(cp, s, j) * heralding_probability(cp, s, j) for s in SCHEMES]
    assert abs(prods[0] - prods[1]) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(channel_params(excited=False), st.floats(min_value=0.05, max_value=1.0))
def test_equal_detectors_equal_heralds(cp, eta):
    cp = ChannelParams(cp.p_cL, cp.p_cR, cp.eta_L, cp.eta_R, eta, eta, cp.theta_L, cp.theta_R)
    for s in SCHEMES:
        assert heralding_probability(cp, s, 1) == heralding_probability(cp, s, 2)


@settings(max_examples=300, deadline=None)
@given(channel_params(excited=False), st.sampled_from([1, 2]))
def test_nrpd_heralds_at_least_as_often(cp, j):
    assert heralding_probability(cp, NRPD, j) >= heralding_probability(cp, PNRD, j)


@settings(max_examples=200, deadline=None)
@given(channel_params(excited=False), phases, phases)
def test_heralding_independent_of_phases(cp, a, b):
    for s in SCHEMES:
        for j in (1, 2):
            assert heralding_probability(cp.with_phases(a, b), s, j) == heralding_probability(cp, s, j)


@settings(max_examples=200, deadline=None)
@given(channel_params(), phases)
def test_fidelity_depends_on_phase_difference_only(cp, shift):
    shifted = cp.with_phases(cp.theta_L + shift, cp.theta_R + shift)
    for s in SCHEMES:
        for j in (1, 2):
            assert fidelity_singlet_triplet(shifted, s, j) == pytest.approx(
                fidelity_singlet_triplet(cp, s, j), abs=1e-12
            )


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-4, max_value=0.99), st.floats(min_value=1e-3, max_value=1.0), phases)
def test_symmetric_closed_forms(p, eta, theta):
    cp = sym(p, eta, theta)
    x = eta * p + 1 - p
    assert fidelity_singlet_triplet(cp, PNRD, 1) == pytest.approx(x**3, abs=1e-12)
    assert fidelity_singlet_triplet(cp, NRPD, 1) == pytest.approx((1 - p) * x**2, abs=1e-12)
    for s in SCHEMES:
        assert heralding_probability(cp, s, 1) == pytest.approx(symmetric_heralding_probability(p, eta, s), rel=1e-12)
        assert symmetric_fidelity(p, eta, s) == pytest.approx(fidelity_singlet_triplet(cp, s, 2), abs=1e-12)
        p_herald = 2 * heralding_probability(cp, s, 1)
        f = fidelity_singlet_triplet(cp, s, 1)
        assert success_probability(cp, s) == pytest.approx(f * p_herald, rel=1e-12)
    assert success_probability(cp) == pytest.approx(symmetric_success_probability(p, eta), rel=1e-12)


@settings(max_examples=300, deadline=None)
@given(channel_params(excited=False), st.sampled_from(SCHEMES), st.sampled_from([1, 2]))
def test_heralding_routes_agree(cp, s, j):
    p = heralding_probability(cp, s, j)
    assert heralding_probability_exponent(cp, s, j) == pytest.approx(p, abs=1e-12)
    assert heralding_probability_moments(cp, s, j) == pytest.approx(p, abs=1e-12)
    assert 0.0 <= p <= 1.0


@settings(max_examples=150, deadline=None)
@given(channel_params(), st.sampled_from(SCHEMES), st.sampled_from([1, 2]), phases, st.floats(0.0, 1.0))
def test_moment_fidelity_matches_closed_form(cp, s, j, phi, w):
    d_L, d_R = math.sqrt(w), math.sqrt(1 - w) * cmath.exp(1j * phi)
    # the moment route subtracts O(1) terms to leave F_j P_j, so its error grows like eps / P_j
    tol = 1e-10 + 1e-14 / heralding_probability(cp, s, j)
    assert fidelity_moments(cp, s, j, d_L, d_R) == pytest.approx(fidelity_arbitrary(cp, s, j, d_L, d_R), abs=tol)


@pytest.mark.parametrize("seed", range(8))
def test_random_asymmetric_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    cp = random_channel(rng, p_max=0.1)
    for s in SCHEMES:
        ref = oracle_distribution(cp, s)
        tail = combined_tail_bound((cp.p_cL, cp.p_cR), 12) + 1e-10
        for j, p_ref, f_ref, fo_ref in ((1, ref.P1, ref.F1, ref.F_opt1), (2, ref.P2, ref.F2, ref.F_opt2)):
            p = heralding_probability(cp, s, j)
            assert abs(p - p_ref) <= tail
            assert abs(fidelity_singlet_triplet(cp, s, j) - f_ref) <= oracle_tolerance(cp, p)
            assert abs(optimal_state(cp, j, s)[2] - fo_ref) <= oracle_tolerance(cp, p)
        assert abs(success_probability(cp, s) - ref.P_success) <= tail


@pytest.mark.parametrize("seed", range(6))
def test_arbitrary_state_fidelity_matches_oracle_both_schemes(seed):
    # the arbitrary-state form is checked directly rather than assumed for non-resolving detectors
    rng = np.random.default_rng(100 + seed)
    cp = random_channel(rng, p_max=0.1)
    d_L, d_R = random_qubit(rng)
    for s in SCHEMES:
        for j in (1, 2):
            p = heralding_probability(cp, s, j)
            f = fidelity_arbitrary(cp, s, j, d_L, d_R)
            assert abs(f - oracle_fidelity_arbitrary(cp, s, j, d_L, d_R)) <= oracle_tolerance(cp, p)


def test_report_consistency():
    cp = ChannelParams(0.05, 0.02, 0.7, 0.3, 0.9, 0.6, 0.1, 0.5)
    for s in SCHEMES:
        rep = herald_report(cp, s)
        assert rep.P_herald == pytest.approx(rep.P1 + rep.P2)
        assert rep.P_success <= rep.P_herald
        assert rep.F1 <= rep.F_opt1 and rep.F2 <= rep.F_opt2
        for d_L, d_R in rep.opt_coeffs:
            assert abs(d_L) ** 2 + abs(d_R) ** 2 == pytest.approx(1.0, abs=1e-14)


def test_phase_average_limits():
    cp = sym(0.02, 0.4, 0.3)
    for s in SCHEMES:
        f_sym = fidelity_singlet_triplet(cp, s, 1)
        assert phase_averaged_fidelity(cp, s, 0.0) == pytest.approx(f_sym, abs=1e-15)
        assert phase_averaged_fidelity(cp, s, 800.0) == pytest.approx(f_sym / 2, abs=1e-15)
        assert phase_averaged_fidelity(cp, s, 1.0) == pytest.approx(f_sym * (1 + math.exp(-1)) / 2, abs=1e-15)


def test_phase_average_monotone():
    cp = sym(0.02, 0.4)
    vals = [phase_averaged_fidelity(cp, PNRD, v) for v in np.linspace(0, 10, 50)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_phase_average_rejects_asymmetric():
    with pytest.raises(ParameterError, match="symmetric"):
        phase_averaged_fidelity(ChannelParams(0.01, 0.02), PNRD, 1.0)
    with pytest.raises(ParameterError):
        phase_averaged_fidelity(sym(0.01, 0.5), PNRD, -1.0)


@pytest.mark.parametrize("s", SCHEMES)
def test_phase_average_monte_carlo(s):
    cp = sym(0.01, 0.3)
    mean, se = phase_averaged_fidelity_mc(cp, s, 1.0, 10**5, np.random.default_rng(99))
    assert abs(mean - phase_averaged_fidelity(cp, s, 1.0)) < 3 * se


@settings(max_examples=100, deadline=None)
@given(channel_params(), st.sampled_from([1, 2]))
def test_fidelity_product_bounded_by_probability(cp, j):
    for s in SCHEMES:
        assert fidelity_product(cp, j, R2, (-1) ** j * R2) <= heralding_probability(cp, s, j) * (1 + 1e-12)
