from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dlcz.errors import ParameterError, UndefinedFidelityError
from dlcz.fock import apply_5050, from_amplitudes, measure, oracle_swap, oracle_teleport
from dlcz.herald import NRPD, PNRD
from dlcz.protocols import (
    MeasurementModule,
    ProtocolReport,
    p11_loss_budget,
    repeater_fidelity,
    repeater_metrics,
    swap_component_probabilities,
    teleport_fidelity,
    teleport_metrics,
)

SCHEMES = (PNRD, NRPD)
etas = st.floats(min_value=0.0, max_value=1.0)


def mod(eta_m: float, s=PNRD) -> MeasurementModule:
    return MeasurementModule.from_eta_m(eta_m, s)


def test_components_at_unit_efficiency():
    assert swap_component_probabilities(mod(1.0, PNRD)) == (0.0, 1.0, 1.0, 0.0)
    assert swap_component_probabilities(mod(1.0, NRPD)) == (0.0, 1.0, 1.0, 1.0)
    for s in SCHEMES:
        assert swap_component_probabilities(mod(0.0, s)) == (0.0, 0.0, 0.0, 0.0)


def test_nrpd_two_photon_component_by_enumeration():
    # |1,1> through the splitter: both photons exit together, one click pattern per port
    t = apply_5050(from_amplitudes(("a", "b"), {(1, 1): 1.0}, 3), "a", "b")
    p = sum(measure(t, ("a", "b"), NRPD, pat)[0] for pat in ((1, 0), (0, 1)))
    assert p == pytest.approx(swap_component_probabilities(mod(1.0, NRPD))[3], abs=1e-15)


def test_repeater_endpoints():
    assert repeater_metrics(mod(1.0, PNRD)).F == 1.0
    assert repeater_metrics(mod(1.0, NRPD)).F == pytest.approx(2 / 3, abs=1e-15)
    assert repeater_metrics(mod(0.5, PNRD)).F == pytest.approx(1 / 1.5, abs=1e-15)
    assert oracle_swap(mod(0.5, PNRD)).F == pytest.approx(1 / 1.5, abs=1e-10)


def test_teleport_endpoints():
    assert teleport_metrics(mod(1.0, PNRD)).F == 1.0
    assert teleport_metrics(mod(1.0, NRPD)).F == pytest.approx(0.5, abs=1e-15)
    assert teleport_metrics(mod(0.8, NRPD)).F == pytest.approx(1 / 2.2, abs=1e-15)
    assert oracle_teleport(mod(0.8, NRPD), 0.6, 0.8).F == pytest.approx(1 / 2.2, abs=1e-10)


@pytest.mark.parametrize("s", SCHEMES)
def test_zero_efficiency_fidelity_undefined(s):
    for fn in (lambda m: repeater_metrics(m).F, lambda m: teleport_metrics(m).F, repeater_fidelity, teleport_fidelity):
        with pytest.raises(UndefinedFidelityError):
            fn(mod(0.0, s))
    assert repeater_metrics(mod(0.0, s)).P_success == 0.0


@given(st.floats(min_value=1e-6, max_value=1.0), st.sampled_from(SCHEMES))
def test_herald_from_components_is_fidelity_consistent(eta, s):
    m = mod(eta, s)
    rep, tel = repeater_metrics(m), teleport_metrics(m)
    assert rep.P_herald == pytest.approx(rep.P_success / repeater_fidelity(m), rel=1e-12)
    assert tel.P_herald == pytest.approx(tel.P_success / teleport_fidelity(m), rel=1e-12)
    assert rep.P_success == pytest.approx(eta / 2)
    assert tel.P_success == pytest.approx(eta**2 / 4)


def test_nrpd_repeater_herald_value():
    # component sum, not the product form eta(1 - eta/2)/2
    eta = 0.6
    assert repeater_metrics(mod(eta, NRPD)).P_herald == pytest.approx(eta * (2 - eta / 2) / 2, rel=1e-15)


@pytest.mark.parametrize("s", SCHEMES)
def test_fidelities_monotone(s):
    grid = np.linspace(0.01, 1.0, 100)
    for fn in (repeater_fidelity, teleport_fidelity):
        vals = [fn(mod(e, s)) for e in grid]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


@given(st.floats(min_value=1e-6, max_value=1.0))
def test_resolving_detectors_dominate(eta):
    assert repeater_fidelity(mod(eta, PNRD)) >= repeater_fidelity(mod(eta, NRPD))
    assert teleport_fidelity(mod(eta, PNRD)) >= teleport_fidelity(mod(eta, NRPD))


@given(etas, etas)
def test_loss_budget_sums_to_two_photon_component(eta_c, eta_d):
    m = MeasurementModule(eta_c, eta_d, PNRD)
    assert sum(p11_loss_budget(m)) == pytest.approx(swap_component_probabilities(m)[3], abs=1e-15)


@given(etas, etas, st.sampled_from(SCHEMES))
def test_report_invariants(eta_c, eta_d, s):
    m = MeasurementModule(eta_c, eta_d, s)
    for rep in (repeater_metrics(m), teleport_metrics(m)):
        assert 0.0 <= rep.P_success <= rep.P_herald <= 1.0
        if rep.P_herald > 0:
            assert 0.0 <= rep.F <= 1.0


@pytest.mark.parametrize("kw", [dict(eta_c=1.2, eta_d=1.0), dict(eta_c=0.5, eta_d=-0.1)])
def test_module_validation(kw):
    with pytest.raises(ParameterError):
        MeasurementModule(**kw)


def test_module_from_eta_m():
    m = MeasurementModule.from_eta_m(0.3, "nrpd")
    assert m.eta_m == 0.3 and m.scheme is NRPD


def test_report_zero_herald():
    with pytest.raises(UndefinedFidelityError):
        ProtocolReport(0.0, 0.0).F
