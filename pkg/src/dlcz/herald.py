"""Heralding probabilities and fidelities for DLCZ entanglement distribution.

Detector ``j`` (1 or 2) heralds the state
``|psi_j> = (|1>_L|0>_R + (-1)^j |0>_L|1>_R)/sqrt(2)``.

Heralding probabilities are evaluated in a rearranged form that stays finite
when a detector efficiency is zero.  Writing ``u_A = 2 eta_A p_cA/(1 - p_cA)``,
``U = u_L + u_R`` and ``D = eta_1 eta_2 u_L u_R + (eta_1 + eta_2) U + 4``
(which equals ``eta_1 eta_2 (beta_L beta_R - delta^2)``), with ``i`` the
other detector::

    PNRD:  P_j = 4 eta_j (U + eta_i u_L u_R) / D^2
    NRPD:  P_j = 4 eta_j (U + eta_i u_L u_R) / (D (eta_i U + 4))

The product ``F_j P_j`` does not depend on the detection scheme, which is why
fidelities are computed as that product divided by ``P_j``.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import gaussian as g
from .channel import ChannelParams, _check_detector, covariance_from_params, exponent_coefficients
from .errors import ParameterError, UndefinedFidelityError

NORM_TOL = 1e-12


class DetectionScheme(enum.Enum):
    """Photon-number resolving (PNRD) or non-resolving (NRPD) detection."""

    PNRD = "PNRD"
    NRPD = "NRPD"

    @classmethod
    def parse(cls, value: "str | DetectionScheme") -> "DetectionScheme":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ParameterError(f"unknown detection scheme {value!r}") from None


PNRD = DetectionScheme.PNRD
NRPD = DetectionScheme.NRPD


@dataclass(frozen=True)
class HeraldReport:
    """Per-detector distribution metrics.

    Fidelity fields are ``None`` when the corresponding herald has zero
    probability.  ``opt_coeffs[j-1]`` holds ``(d_L, d_R)`` of the optimal
    state for detector ``j``.
    """

    P1: float
    P2: float
    F1: Optional[float]
    F2: Optional[float]
    P_success: float
    F_opt1: Optional[float]
    F_opt2: Optional[float]
    opt_coeffs: tuple[tuple[complex, complex], tuple[complex, complex]] | None

    @property
    def P_herald(self) -> float:
        return self.P1 + self.P2


def _u(eta: float, p: float) -> float:
    return 2.0 * eta * p / (1.0 - p)


def heralding_probability(cp: ChannelParams, s: DetectionScheme, j: int) -> float:
    """Probability that detector ``j`` alone registers the herald."""
    s = DetectionScheme.parse(s)
    _check_detector(j)
    eta_j = cp.detector_efficiency(j)
    eta_i = cp.detector_efficiency(3 - j)
    uL, uR = _u(cp.eta_L, cp.p_cL), _u(cp.eta_R, cp.p_cR)
    U = uL + uR
    D = cp.eta_1 * cp.eta_2 * uL * uR + (cp.eta_1 + cp.eta_2) * U + 4.0
    num = 4.0 * eta_j * (U + eta_i * uL * uR)
    if s is PNRD:
        return num / D**2
    return num / (D * (eta_i * U + 4.0))


def heralding_probability_exponent(cp: ChannelParams, s: DetectionScheme, j: int) -> float:
    """Same quantity written directly with the exponent coefficients (needs eta_1, eta_2 > 0)."""
    s = DetectionScheme.parse(s)
    _check_detector(j)
    q = exponent_coefficients(cp)
    e1, e2 = cp.eta_1, cp.eta_2
    eta_j = cp.detector_efficiency(j)
    eta_i = cp.detector_efficiency(3 - j)
    det = q.beta_L * q.beta_R - q.delta**2
    lin = q.beta_L + q.beta_R - 2.0 * (-1) ** j * q.delta
    if s is PNRD:
        return 4.0 / (e1 * e2 * det) * (1.0 - lin / (eta_j * det))
    return 4.0 / (eta_i * lin) - 4.0 / (e1 * e2 * det)


def _overlap_sq(cp: ChannelParams, j: int, d_L: complex, d_R: complex) -> float:
    amp = (
        math.sqrt(cp.a_L) * np.conj(d_L) * cmath.exp(1j * cp.theta_L)
        + (-1) ** j * math.sqrt(cp.a_R) * np.conj(d_R) * cmath.exp(1j * cp.theta_R)
    )
    return float(abs(amp) ** 2)


def fidelity_product(cp: ChannelParams, j: int, d_L: complex, d_R: complex) -> float:
    """Scheme-independent ``F_{j,d} * P_j`` for target ``d_L|10> + d_R|01>``."""
    _check_detector(j)
    eta_j = cp.detector_efficiency(j)
    return eta_j * (1.0 - cp.p_cL) * (1.0 - cp.p_cR) * _overlap_sq(cp, j, d_L, d_R) / 2.0


def _singlet_coeffs(j: int) -> tuple[float, float]:
    return 1.0 / math.sqrt(2.0), (-1) ** j / math.sqrt(2.0)


def _divide(product: float, prob: float) -> float:
    if prob <= 0.0:
        raise UndefinedFidelityError("herald impossible; fidelity undefined")
    return min(max(product / prob, 0.0), 1.0)


def fidelity_singlet_triplet(cp: ChannelParams, s: DetectionScheme, j: int) -> float:
    """Fidelity of the heralded state with ``|psi_j>``."""
    d_L, d_R = _singlet_coeffs(j)
    return _divide(fidelity_product(cp, j, d_L, d_R), heralding_probability(cp, s, j))


def _check_normalized(d_L: complex, d_R: complex) -> None:
    norm = abs(d_L) ** 2 + abs(d_R) ** 2
    if abs(norm - 1.0) > NORM_TOL:
        raise ParameterError(f"target state not normalized: |d_L|^2 + |d_R|^2 = {norm!r}")


def fidelity_arbitrary(
    cp: ChannelParams, s: DetectionScheme, j: int, d_L: complex, d_R: complex
) -> float:
    """Fidelity of the heralded state with ``d_L|1>_L|0>_R + d_R|0>_L|1>_R``."""
    _check_normalized(d_L, d_R)
    return _divide(fidelity_product(cp, j, d_L, d_R), heralding_probability(cp, s, j))


def optimal_state_coeffs(cp: ChannelParams, j: int) -> tuple[complex, complex]:
    """Coefficients ``(d_L, d_R)`` of the maximal-fidelity target for detector ``j``."""
    _check_detector(j)
    a, b = cp.a_L, cp.a_R
    if a + b <= 0.0:
        raise ParameterError("no excitation channel: eta_L p_cL + eta_R p_cR = 0")
    d_R = (-1) ** j * cmath.exp(1j * (cp.theta_R - cp.theta_L)) * math.sqrt(b / (a + b))
    return complex(math.sqrt(a / (a + b))), d_R


def optimal_state(
    cp: ChannelParams, j: int, s: DetectionScheme = PNRD
) -> tuple[complex, complex, float]:
    """Target state of maximal fidelity for detector ``j`` and that fidelity.

    The maximizing coefficients do not depend on the detection scheme; the
    fidelity does, through ``P_j``.
    """
    d_L, d_R = optimal_state_coeffs(cp, j)
    eta_j = cp.detector_efficiency(j)
    product = eta_j * (1.0 - cp.p_cL) * (1.0 - cp.p_cR) * (cp.a_L + cp.a_R) / 2.0
    return d_L, d_R, _divide(product, heralding_probability(cp, s, j))


def success_probability(cp: ChannelParams, s: DetectionScheme = PNRD) -> float:
    """``P_1 F_1 + P_2 F_2``; identical for both schemes."""
    DetectionScheme.parse(s)
    total = 0.0
    for j in (1, 2):
        total += fidelity_product(cp, j, *_singlet_coeffs(j))
    return total


def _is_symmetric_except_phase(cp: ChannelParams) -> bool:
    return cp.p_cL == cp.p_cR and cp.eta_L == cp.eta_R and cp.eta_1 == cp.eta_2


def phase_averaged_fidelity(cp: ChannelParams, s: DetectionScheme, sigma2: float) -> float:
    """Fidelity averaged over independent Gaussian pump-phase noise of variance ``sigma2`` each."""
    if sigma2 < 0:
        raise ParameterError("phase variance must be non-negative")
    if not _is_symmetric_except_phase(cp):
        raise ParameterError("closed form valid only for symmetric setup")
    f_sym = fidelity_singlet_triplet(cp.with_phases(0.0, 0.0), s, 1)
    return f_sym * (1.0 + math.exp(-sigma2)) / 2.0


def phase_averaged_fidelity_mc(
    cp: ChannelParams,
    s: DetectionScheme,
    sigma2: float,
    samples: int,
    rng: np.random.Generator,
    j: int = 1,
) -> tuple[float, float]:
    """Monte-Carlo mean and standard error of ``F_j`` with Gaussian phase jitter.

    Each pump phase gets an independent zero-mean offset of variance ``sigma2``
    added to its configured value.
    """
    p = heralding_probability(cp, s, j)
    if p <= 0.0:
        raise UndefinedFidelityError("herald impossible; fidelity undefined")
    sd = math.sqrt(sigma2)
    th_L = cp.theta_L + sd * rng.standard_normal(samples)
    th_R = cp.theta_R + sd * rng.standard_normal(samples)
    a, b = cp.a_L, cp.a_R
    eta_j = cp.detector_efficiency(j)
    f = (
        eta_j * (1 - cp.p_cL) * (1 - cp.p_cR) / (4 * p)
        * (a + b + 2 * math.sqrt(a * b) * np.cos(th_L - th_R))
    )
    return float(f.mean()), float(f.std(ddof=1) / math.sqrt(samples))


def herald_report(cp: ChannelParams, s: DetectionScheme) -> HeraldReport:
    s = DetectionScheme.parse(s)
    probs = [heralding_probability(cp, s, j) for j in (1, 2)]
    excited = cp.a_L + cp.a_R > 0
    fids: list[Optional[float]] = []
    opts: list[Optional[float]] = []
    for j, p in zip((1, 2), probs):
        live = p > 0
        fids.append(fidelity_singlet_triplet(cp, s, j) if live else None)
        opts.append(optimal_state(cp, j, s)[2] if live and excited else None)
    coeffs = tuple(optimal_state_coeffs(cp, j) for j in (1, 2)) if excited else None
    return HeraldReport(
        P1=probs[0], P2=probs[1], F1=fids[0], F2=fids[1],
        P_success=success_probability(cp, s),
        F_opt1=opts[0], F_opt2=opts[1],
        opt_coeffs=coeffs,
    )


# symmetric closed forms; p_c = 1 is admitted as a limit


def _check_sym(p_c: float, eta_s: float) -> None:
    if not (0.0 <= p_c <= 1.0 and 0.0 <= eta_s <= 1.0):
        raise ParameterError("need 0 <= p_c <= 1 and 0 <= eta_s <= 1")


def symmetric_heralding_probability(p_c: float, eta_s: float, s: DetectionScheme) -> float:
    """Per-detector heralding probability of the symmetric link."""
    _check_sym(p_c, eta_s)
    x = eta_s * p_c + 1.0 - p_c
    if DetectionScheme.parse(s) is PNRD:
        return (1 - p_c) ** 2 * eta_s * p_c / x**3
    return (1 - p_c) * eta_s * p_c / x**2


def symmetric_fidelity(p_c: float, eta_s: float, s: DetectionScheme) -> float:
    """Fidelity of entanglement of the symmetric link (limit value where ``P_j = 0``)."""
    _check_sym(p_c, eta_s)
    x = eta_s * p_c + 1.0 - p_c
    if DetectionScheme.parse(s) is PNRD:
        return x**3
    return (1 - p_c) * x**2


def symmetric_success_probability(p_c: float, eta_s: float) -> float:
    _check_sym(p_c, eta_s)
    return 2.0 * eta_s * p_c * (1 - p_c) ** 2


# moment-based evaluation, kept as an independent cross-check


def _pj_weights(j: int, eta_j: float) -> np.ndarray:
    sign = -1.0 if j == 1 else 1.0
    return (g.ZETA_P_PLUS + sign * g.ZETA_P_MINUS) / math.sqrt(2.0 * eta_j)


def heralding_probability_moments(cp: ChannelParams, s: DetectionScheme, j: int) -> float:
    """Heralding probability by Gaussian integration over the photon block of the exponent."""
    s = DetectionScheme.parse(s)
    _check_detector(j)
    q = exponent_coefficients(cp).matrix()
    photon = [g.PR_MINUS, g.PI_MINUS, g.PR_PLUS, g.PI_PLUS]
    qp = q[np.ix_(photon, photon)]
    eta_j = cp.detector_efficiency(j)
    eta_i = cp.detector_efficiency(3 - j)
    vacuum_both = 4.0 / (cp.eta_1 * cp.eta_2 * math.sqrt(np.linalg.det(qp)))
    if s is PNRD:
        kp = g.invert_spd(qp)
        w = _pj_weights(j, eta_j)[photon]
        second = float(np.real(w @ kp @ np.conj(w)))
        return vacuum_both * (1.0 - second)
    # vacuum on detector i only: restrict to zeta_pj = 0, a one-complex-dimensional slice
    sign = 1.0 if j == 1 else -1.0
    c = q[g.PR_MINUS, g.PR_MINUS] + q[g.PR_PLUS, g.PR_PLUS] + 2.0 * sign * q[g.PR_MINUS, g.PR_PLUS]
    return 4.0 / (eta_i * c) - vacuum_both


def fidelity_moments(
    cp: ChannelParams, s: DetectionScheme, j: int, d_L: complex, d_R: complex
) -> float:
    """Arbitrary-state fidelity from second and fourth moments of the covariance matrix."""
    _check_normalized(d_L, d_R)
    K = covariance_from_params(cp)
    eta_j = cp.detector_efficiency(j)
    zp = _pj_weights(j, eta_j)
    w = np.conj(d_L) * g.ZETA_A_L + np.conj(d_R) * g.ZETA_A_R
    e_pp = g.pair_moment(K, zp, np.conj(zp)).real
    e_ww = g.pair_moment(K, w, np.conj(w)).real
    e_ppww = g.fourth_moment_factored(K, zp, np.conj(zp), w, np.conj(w)).real
    prefactor = 16.0 * K.sqrt_det / (cp.eta_1 * cp.eta_2)
    product = prefactor * (1.0 - e_pp - e_ww + e_ppww)
    return _divide(product, heralding_probability_moments(cp, s, j))
