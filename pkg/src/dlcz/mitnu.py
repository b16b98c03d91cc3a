"""Trapped-atom (MIT/NU) entanglement distribution and the throughput comparison.

A dual-OPA source at the midpoint sends polarization-entangled signal and
idler photons ``L0`` km in opposite directions to two single-atom memories.
Both photons must survive, so throughput falls twice as fast with distance as
for the ensemble scheme, where one photon per path reaches a central station.
"""

from __future__ import annotations

import decimal
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channel import ChannelParams
from .errors import ParameterError, UndefinedFidelityError
from .herald import PNRD, fidelity_singlet_triplet, success_probability

DEFAULT_COUPLING_RATIO = 10.0 ** -0.5


def db_to_transmissivity(loss_db: float) -> float:
    return 10.0 ** (-loss_db / 10.0)


@dataclass(frozen=True)
class MitNuParams:
    """Source and memory parameters.

    ``G2`` is the normalized OPA pump gain (1 at threshold), ``eta_f`` the
    source-to-memory fiber transmissivity, ``coupling_ratio`` the product
    ``gamma gamma_c / (Gamma Gamma_c)`` of output and input coupling
    efficiencies and ``linewidth_ratio`` the memory-to-OPA linewidth ratio.
    """

    G2: float
    eta_f: float = 1.0
    coupling_ratio: float = DEFAULT_COUPLING_RATIO
    linewidth_ratio: float = 0.5
    theta_1: float = 0.0
    theta_2: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.G2 < 1.0:
            if self.G2 == 1.0:
                raise ParameterError("|G| = 1 is the oscillation threshold; moments diverge")
            raise ParameterError(f"G2={self.G2!r} outside [0, 1)")
        if not 0.0 <= self.eta_f <= 1.0:
            raise ParameterError(f"eta_f={self.eta_f!r} outside [0, 1]")
        if not 0.0 < self.coupling_ratio <= 1.0:
            raise ParameterError(f"coupling_ratio={self.coupling_ratio!r} outside (0, 1]")
        if not self.linewidth_ratio > 0.0:
            raise ParameterError("linewidth_ratio must be positive")


@dataclass(frozen=True)
class LinkGeometry:
    """Half-distance ``L0`` (km), fiber loss (dB/km) and trial rate ``R`` (Hz)."""

    L0: float
    loss_db_per_km: float = 0.2
    rate_hz: float = 500e3

    def __post_init__(self):
        if self.L0 < 0 or self.loss_db_per_km < 0 or not self.rate_hz > 0:
            raise ParameterError("need L0 >= 0, loss >= 0 and R > 0")

    @property
    def transmissivity(self) -> float:
        """Fiber transmissivity over one half-span ``L0``."""
        return db_to_transmissivity(self.loss_db_per_km * self.L0)


@dataclass(frozen=True)
class MitNuMoments:
    I_plus: float
    I_minus: float
    n_bar: float
    n_tilde: float
    N: float


def mitnu_moments(p: MitNuParams) -> MitNuMoments:
    g = math.sqrt(p.G2)
    scale = p.eta_f * p.coupling_ratio * g
    lr = p.linewidth_ratio
    i_plus = scale / ((1 + g) * (1 + g + lr))
    i_minus = scale / ((1 - g) * (1 - g + lr))
    n_bar = i_minus - i_plus
    n_tilde = i_minus + i_plus
    return MitNuMoments(i_plus, i_minus, n_bar, n_tilde, n_bar * (1 + n_bar) - n_tilde**2)


def _numerator(m: MitNuMoments, coherence: float) -> float:
    return m.N**2 + m.n_tilde**2 * (1.0 + coherence)


def _fidelity(m: MitNuMoments, coherence: float) -> float:
    den = 4.0 * m.N**2 + 2.0 * m.n_tilde**2
    if den <= 0.0:
        raise UndefinedFidelityError("no loading events; fidelity undefined")
    return _numerator(m, coherence) / den


def mitnu_metrics(p: MitNuParams) -> tuple[float, float]:
    """``(P_success, F_E)``; raises for the fidelity when nothing can load."""
    m = mitnu_moments(p)
    return mitnu_success_probability(p), _fidelity(m, math.cos(p.theta_1 - p.theta_2))


def mitnu_success_probability(p: MitNuParams) -> float:
    """Probability per trial that both memories load the singlet."""
    m = mitnu_moments(p)
    c = math.cos(p.theta_1 - p.theta_2)
    return _numerator(m, c) / ((1 + m.n_bar) ** 2 - m.n_tilde**2) ** 4


def phase_averaged_mitnu(p: MitNuParams, sigma2: float) -> float:
    """Fidelity with independent Gaussian jitter of variance ``sigma2`` on each pump phase."""
    if sigma2 < 0:
        raise ParameterError("phase variance must be non-negative")
    return _fidelity(mitnu_moments(p), math.exp(-sigma2))


def phase_averaged_mitnu_mc(
    p: MitNuParams, sigma2: float, samples: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Monte-Carlo mean and standard error of the fidelity under phase jitter."""
    m = mitnu_moments(p)
    sd = math.sqrt(sigma2)
    d = (p.theta_1 - p.theta_2) + sd * (rng.standard_normal(samples) - rng.standard_normal(samples))
    den = 4.0 * m.N**2 + 2.0 * m.n_tilde**2
    if den <= 0.0:
        raise UndefinedFidelityError("no loading events; fidelity undefined")
    f = (m.N**2 + m.n_tilde**2 * (1.0 + np.cos(d))) / den
    return float(f.mean()), float(f.std(ddof=1) / math.sqrt(samples))


def mitnu_metrics_decimal(p: MitNuParams, digits: int = 50) -> tuple[float, Optional[float]]:
    """Reference evaluation of ``(P_success, F_E)`` in high-precision decimal arithmetic.

    Inputs are converted exactly from their binary values; only the phase
    cosine is taken from float arithmetic.
    """
    with decimal.localcontext() as ctx:
        ctx.prec = digits
        D = decimal.Decimal
        g = D(p.G2).sqrt()
        scale = D(p.eta_f) * D(p.coupling_ratio) * g
        lr = D(p.linewidth_ratio)
        i_plus = scale / ((1 + g) * (1 + g + lr))
        i_minus = scale / ((1 - g) * (1 - g + lr))
        n_bar = i_minus - i_plus
        n_tilde = i_minus + i_plus
        big_n = n_bar * (1 + n_bar) - n_tilde**2
        num = big_n**2 + n_tilde**2 * (1 + D(math.cos(p.theta_1 - p.theta_2)))
        p_success = num / ((1 + n_bar) ** 2 - n_tilde**2) ** 4
        den = 4 * big_n**2 + 2 * n_tilde**2
        fid = float(num / den) if den > 0 else None
        return float(p_success), fid


@dataclass(frozen=True)
class ComparisonRow:
    total_km: float
    dlcz_throughput: float
    mitnu_throughput: float
    dlcz_F: Optional[float]
    mitnu_F: Optional[float]


def dlcz_link(p_c: float, eta_d: float, eta_path: float, theta: float = 0.0) -> ChannelParams:
    return ChannelParams(
        p_cL=p_c, p_cR=p_c, eta_L=eta_path, eta_R=eta_path,
        eta_1=eta_d, eta_2=eta_d, theta_L=theta, theta_R=theta,
    )


def throughput_comparison(
    total_km: Sequence[float],
    *,
    p_c: float = 0.01,
    eta_d: float = 0.5,
    mitnu: MitNuParams = MitNuParams(G2=0.01),
    loss_db_per_km: float = 0.2,
    rate_hz: float = 500e3,
) -> list[ComparisonRow]:
    """Throughput ``R * P_success`` and fidelity of both architectures versus ``2 L0``.

    The ensemble throughput carries an extra factor 1/2 because every
    application needs two entangled ensemble pairs.  ``mitnu.eta_f`` is
    replaced by the fiber transmissivity at each distance; its fixed loss
    lives in ``mitnu.coupling_ratio``.
    """
    rows = []
    for d in total_km:
        geo = LinkGeometry(L0=float(d) / 2.0, loss_db_per_km=loss_db_per_km, rate_hz=rate_hz)
        eta = geo.transmissivity
        cp = dlcz_link(p_c, eta_d, eta)
        mp = MitNuParams(
            G2=mitnu.G2, eta_f=eta, coupling_ratio=mitnu.coupling_ratio,
            linewidth_ratio=mitnu.linewidth_ratio, theta_1=mitnu.theta_1, theta_2=mitnu.theta_2,
        )
        try:
            f_dlcz: Optional[float] = fidelity_singlet_triplet(cp, PNRD, 1)
        except UndefinedFidelityError:
            f_dlcz = None
        try:
            p_mit, f_mit = mitnu_metrics(mp)
        except UndefinedFidelityError:
            p_mit, f_mit = mitnu_success_probability(mp), None
        rows.append(
            ComparisonRow(
                total_km=float(d),
                dlcz_throughput=0.5 * rate_hz * success_probability(cp),
                mitnu_throughput=rate_hz * p_mit,
                dlcz_F=f_dlcz,
                mitnu_F=f_mit,
            )
        )
    return rows


def decay_rate(total_km: Sequence[float], throughput: Sequence[float]) -> float:
    """Least-squares slope of ``-log10(throughput)`` per km."""
    x = np.asarray(total_km, dtype=float)
    y = np.log10(np.asarray(throughput, dtype=float))
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)
