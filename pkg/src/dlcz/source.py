"""Pump parameters to two-mode-squeezed source description."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError


@dataclass(frozen=True)
class PumpParams:
    """Physical write-pulse parameters of one atomic ensemble.

    Rates are angular frequencies in rad/s, ``t_delta`` is in seconds.
    """

    N_a: int
    omega: float
    g_c: float
    t_delta: float
    detuning: float
    kappa: float

    def __post_init__(self):
        if self.N_a < 1:
            raise ParameterError(f"atom count must be >= 1, got {self.N_a}")
        for name in ("omega", "g_c", "detuning", "kappa"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be strictly positive")
        if self.t_delta < 0:
            raise ParameterError("pump duration must be non-negative")

    @property
    def exponent(self) -> float:
        """Argument of the exponential that sets ``cosh r``."""
        return 2.0 * self.N_a * abs(self.omega * self.g_c) ** 2 * self.t_delta / (
            self.detuning**2 * self.kappa
        )


@dataclass(frozen=True)
class SourceState:
    """Two-mode squeezed atom/Stokes state.

    ``mu = cosh r`` and ``nu = -sinh r * exp(i theta)``.
    """

    r: float
    p_c: float
    theta: float
    mu: complex
    nu: complex


def _from_r(r: float, theta: float, p_c: float | None = None) -> SourceState:
    mu = math.cosh(r)
    nu = -math.sinh(r) * complex(math.cos(theta), math.sin(theta))
    if p_c is None:
        p_c = math.tanh(r) ** 2
    return SourceState(r=r, p_c=p_c, theta=theta, mu=complex(mu), nu=nu)


def pump_to_source(p: PumpParams, theta: float = 0.0) -> SourceState:
    """Squeeze parameter from ``cosh r = exp(2 N_a |Omega g_c|^2 t / (Delta^2 kappa))``."""
    x = p.exponent
    if not math.isfinite(x) or x > 700.0:
        raise ParameterError(f"pump exponent {x!r} overflows; squeeze parameter out of range")
    # acosh(e^x) = x + log(1 + sqrt(1 - e^{-2x})), stable for small and large x
    r = x + math.log1p(math.sqrt(-math.expm1(-2.0 * x)))
    return _from_r(r, theta)


def pc_to_source(p_c: float, theta: float = 0.0) -> SourceState:
    """Source state with excitation probability ``p_c = tanh^2 r``."""
    if not 0.0 <= p_c:
        raise ParameterError("excitation probability must be >= 0")
    if p_c >= 1.0:
        raise ParameterError("excitation probability must be < 1")
    return _from_r(math.atanh(math.sqrt(p_c)), theta, p_c=p_c)
