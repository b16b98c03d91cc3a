"""Post-channel Gaussian description of an asymmetric DLCZ link.

Each ensemble emits a Stokes photon that travels through a lossy path
(transmissivity ``eta_L`` or ``eta_R``) to a 50/50 beam splitter whose two
outputs are read by detectors of efficiency ``eta_1`` and ``eta_2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ParameterError
from .gaussian import CovarianceMatrix, QuadraticExponent, invert_spd


def _check_unit(name: str, value: float, *, closed: bool = True) -> None:
    ok = 0.0 <= value <= 1.0 if closed else 0.0 <= value < 1.0
    if not ok or math.isnan(value):
        bound = "[0, 1]" if closed else "[0, 1)"
        raise ParameterError(f"{name}={value!r} outside {bound}")


@dataclass(frozen=True)
class ChannelParams:
    """Full asymmetric link configuration."""

    p_cL: float
    p_cR: float
    eta_L: float = 1.0
    eta_R: float = 1.0
    eta_1: float = 1.0
    eta_2: float = 1.0
    theta_L: float = 0.0
    theta_R: float = 0.0

    def __post_init__(self):
        _check_unit("p_cL", self.p_cL, closed=False)
        _check_unit("p_cR", self.p_cR, closed=False)
        for name in ("eta_L", "eta_R", "eta_1", "eta_2"):
            _check_unit(name, getattr(self, name))
        for name in ("theta_L", "theta_R"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")

    @property
    def a_L(self) -> float:
        """Effective left excitation rate ``eta_L p_cL`` reaching the splitter."""
        return self.eta_L * self.p_cL

    @property
    def a_R(self) -> float:
        return self.eta_R * self.p_cR

    def detector_efficiency(self, j: int) -> float:
        return {1: self.eta_1, 2: self.eta_2}[_check_detector(j)]

    def mirrored(self) -> "ChannelParams":
        """Swap the left and right halves and the two detectors."""
        return ChannelParams(
            p_cL=self.p_cR, p_cR=self.p_cL, eta_L=self.eta_R, eta_R=self.eta_L,
            eta_1=self.eta_2, eta_2=self.eta_1, theta_L=self.theta_R, theta_R=self.theta_L,
        )

    def with_phases(self, theta_L: float, theta_R: float) -> "ChannelParams":
        return replace(self, theta_L=theta_L, theta_R=theta_R)


@dataclass(frozen=True)
class SymmetricParams:
    """Symmetric link: equal sources, paths and detectors.

    ``eta_s = eta_L * eta_1`` is the system efficiency.  By default the whole
    loss is placed in the path and the detectors are ideal; the closed-form
    metrics depend only on ``eta_s``.
    """

    p_c: float
    eta_s: float
    theta: float = 0.0

    def __post_init__(self):
        _check_unit("p_c", self.p_c, closed=False)
        _check_unit("eta_s", self.eta_s)

    def to_channel(self, eta_d: float = 1.0) -> ChannelParams:
        """Expand with detector efficiency ``eta_d`` (path takes ``eta_s / eta_d``)."""
        if not 0.0 < eta_d <= 1.0 or self.eta_s > eta_d:
            raise ParameterError("need eta_s <= eta_d <= 1 and eta_d > 0")
        eta_path = self.eta_s / eta_d
        return ChannelParams(
            p_cL=self.p_c, p_cR=self.p_c, eta_L=eta_path, eta_R=eta_path,
            eta_1=eta_d, eta_2=eta_d, theta_L=self.theta, theta_R=self.theta,
        )


def _check_detector(j: int) -> int:
    if j not in (1, 2):
        raise ParameterError(f"detector index must be 1 or 2, got {j!r}")
    return j


def exponent_coefficients(cp: ChannelParams) -> QuadraticExponent:
    """Coefficients ``alpha, beta, gamma, delta`` of the post-channel exponent."""
    e1, e2 = cp.eta_1, cp.eta_2
    if e1 * e2 == 0.0:
        raise ParameterError("zero detector efficiency: exponent coefficients diverge")
    alpha_L = 2.0 / (1.0 - cp.p_cL)
    alpha_R = 2.0 / (1.0 - cp.p_cR)
    s = (e1 + e2) / (e1 * e2)
    return QuadraticExponent(
        alpha_L=alpha_L,
        alpha_R=alpha_R,
        beta_L=cp.a_L * alpha_L + s,
        beta_R=cp.a_R * alpha_R + s,
        gamma_L=math.sqrt(cp.a_L) * alpha_L,
        gamma_R=math.sqrt(cp.a_R) * alpha_R,
        delta=(e1 - e2) / (e1 * e2),
        theta_L=cp.theta_L,
        theta_R=cp.theta_R,
    )


def exponent_matrix(cp: ChannelParams) -> np.ndarray:
    """The 8x8 matrix ``K^{-1}`` of the quadratic exponent."""
    return exponent_coefficients(cp).matrix()


def covariance_from_params(cp: ChannelParams) -> CovarianceMatrix:
    """Covariance matrix ``K`` in closed form (1-based entries below)."""
    sp = cp.eta_1 + cp.eta_2
    dm = cp.eta_1 - cp.eta_2
    xl = math.sqrt(cp.a_L)
    xr = math.sqrt(cp.a_R)
    cl, sl = math.cos(cp.theta_L), math.sin(cp.theta_L)
    cr, sr = math.cos(cp.theta_R), math.sin(cp.theta_R)
    c_lr = math.cos(cp.theta_L - cp.theta_R)
    s_rl = math.sin(cp.theta_R - cp.theta_L)

    k = np.zeros((9, 9))

    def put(value: float, *pairs: tuple[int, int]) -> None:
        for i, j in pairs:
            k[i, j] = k[j, i] = value

    put((1 - cp.p_cL) / 2 + cp.a_L * sp / 4, (1, 1), (2, 2))
    put((1 - cp.p_cR) / 2 + cp.a_R * sp / 4, (7, 7), (8, 8))
    put(sp / 4, (3, 3), (4, 4), (5, 5), (6, 6))
    put(-dm / 4, (3, 5), (4, 6))

    # left atom with detected light
    put(sp * xl * cl / 4, (2, 4))
    put(-sp * xl * cl / 4, (1, 3))
    put(-sp * xl * sl / 4, (1, 4), (2, 3))
    put(dm * xl * cl / 4, (1, 5))
    put(-dm * xl * cl / 4, (2, 6))
    put(dm * xl * sl / 4, (1, 6), (2, 5))

    # right atom with detected light
    put(dm * xr * cr / 4, (3, 7))
    put(-dm * xr * cr / 4, (4, 8))
    put(dm * xr * sr / 4, (3, 8), (4, 7))
    put(sp * xr * cr / 4, (6, 8))
    put(-sp * xr * cr / 4, (5, 7))
    put(-sp * xr * sr / 4, (5, 8), (6, 7))

    # atom-atom
    put(-dm * xl * xr * c_lr / 4, (1, 7), (2, 8))
    put(-dm * xl * xr * s_rl / 4, (1, 8))
    put(dm * xl * xr * s_rl / 4, (2, 7))

    return CovarianceMatrix(k[1:, 1:])


def covariance_by_inversion(cp: ChannelParams) -> CovarianceMatrix:
    """Covariance obtained by numerically inverting the exponent matrix (cross-check path)."""
    return CovarianceMatrix(invert_spd(exponent_matrix(cp)))
