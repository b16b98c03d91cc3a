"""Entanglement swapping (repeater) and conditional teleportation metrics.

Both protocols end in a Bell-type measurement module: two retrieved anti-Stokes
modes are combined on a 50/50 splitter and read by two detectors.  Retrieval
and transport transmissivity ``eta_c`` and detector efficiency ``eta_d``
combine into the measurement efficiency ``eta_m = eta_c * eta_d``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParameterError, UndefinedFidelityError
from .herald import DetectionScheme, PNRD


@dataclass(frozen=True)
class MeasurementModule:
    eta_c: float
    eta_d: float
    scheme: DetectionScheme = PNRD

    def __post_init__(self):
        for name in ("eta_c", "eta_d"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ParameterError(f"{name}={v!r} outside [0, 1]")
        object.__setattr__(self, "scheme", DetectionScheme.parse(self.scheme))

    @classmethod
    def from_eta_m(cls, eta_m: float, scheme: DetectionScheme = PNRD) -> "MeasurementModule":
        """Module with all loss placed in the retrieval path."""
        return cls(eta_c=eta_m, eta_d=1.0, scheme=scheme)

    @property
    def eta_m(self) -> float:
        return self.eta_c * self.eta_d


@dataclass(frozen=True)
class ProtocolReport:
    P_herald: float
    P_success: float

    @property
    def F(self) -> float:
        """Conditional fidelity ``P_success / P_herald``."""
        if self.P_herald <= 0.0:
            raise UndefinedFidelityError("herald impossible; fidelity undefined")
        return self.P_success / self.P_herald


def swap_component_probabilities(m: MeasurementModule) -> tuple[float, float, float, float]:
    """Herald probabilities ``(P00, P01, P10, P11)`` for each photon-number input.

    ``Pxy`` is the chance that one detector (either) reports the herald when
    the two measured modes carry ``x`` and ``y`` photons.
    """
    eta = m.eta_m
    if m.scheme is PNRD:
        p11 = 2.0 * eta * (1.0 - eta)
    else:
        p11 = 2.0 * eta * (1.0 - eta / 2.0)
    return 0.0, eta, eta, p11


def repeater_metrics(m: MeasurementModule) -> ProtocolReport:
    """Swap two ideal singlets into one across the outer ensembles."""
    p00, p01, p10, p11 = swap_component_probabilities(m)
    return ProtocolReport(P_herald=(p00 + p01 + p10 + p11) / 4.0, P_success=m.eta_m / 2.0)


def teleport_metrics(m: MeasurementModule) -> ProtocolReport:
    """Teleport a dual-rail qubit using two measurement modules.

    Only the good terms (one photon into each module) can produce the target
    state; the bad terms with a doubly occupied module herald at rate
    ``P11 * P01``.  The result does not depend on the teleported amplitudes.
    """
    _, p01, p10, p11 = swap_component_probabilities(m)
    return ProtocolReport(P_herald=(p01 * p10 + p11 * p01) / 4.0, P_success=p01 * p10 / 4.0)


def repeater_fidelity(m: MeasurementModule) -> float:
    """Closed form ``1/(2 - eta_m)`` (PNRD) or ``1/(2 - eta_m/2)`` (NRPD)."""
    if m.eta_m <= 0.0:
        raise UndefinedFidelityError("herald impossible; fidelity undefined")
    k = 1.0 if m.scheme is PNRD else 0.5
    return 1.0 / (2.0 - k * m.eta_m)


def teleport_fidelity(m: MeasurementModule) -> float:
    """Closed form ``1/(3 - 2 eta_m)`` (PNRD) or ``1/(3 - eta_m)`` (NRPD)."""
    if m.eta_m <= 0.0:
        raise UndefinedFidelityError("herald impossible; fidelity undefined")
    k = 2.0 if m.scheme is PNRD else 1.0
    return 1.0 / (3.0 - k * m.eta_m)


def p11_loss_budget(m: MeasurementModule) -> tuple[float, float]:
    """Split the PNRD two-photon herald probability by loss location.

    Returns ``(retrieval, detector)``: the part where a photon is lost before
    the splitter, ``2 (1 - eta_c) eta_m``, and the part where both photons
    reach the same detector and one goes undetected,
    ``2 eta_c^2 eta_d (1 - eta_d)``.  Their sum equals the PNRD ``P11``.
    """
    retrieval = 2.0 * (1.0 - m.eta_c) * m.eta_m
    detector = 2.0 * m.eta_c**2 * m.eta_d * (1.0 - m.eta_d)
    return retrieval, detector

