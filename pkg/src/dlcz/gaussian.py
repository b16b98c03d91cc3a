r"""Real-matrix utilities and Gaussian moment machinery.

The joint characteristic function of the two ensembles and the detected light
is a zero-mean Gaussian in the real 8-vector

.. math::

    \zeta = [\zeta^L_{ar}, \zeta^L_{ai}, \zeta^-_{pr}, \zeta^-_{pi},
             \zeta^+_{pr}, \zeta^+_{pi}, \zeta^R_{ar}, \zeta^R_{ai}]

and every probability or fidelity of interest reduces to second and fourth
moments of that vector.  Complex variables such as :math:`\zeta^L_a` are
handled as complex weight vectors over the real components, so that
:math:`E\{(u\cdot x)(v\cdot x)\} = u^T K v`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
import scipy.linalg

from .errors import NotPositiveDefiniteError

DIM = 8

# positions in the real 8-vector
AR_L, AI_L, PR_MINUS, PI_MINUS, PR_PLUS, PI_PLUS, AR_R, AI_R = range(DIM)


def _unit(i: int) -> np.ndarray:
    e = np.zeros(DIM, dtype=complex)
    e[i] = 1.0
    return e


# complex variables written as weights over the real components
ZETA_A_L = _unit(AR_L) + 1j * _unit(AI_L)
ZETA_P_MINUS = _unit(PR_MINUS) + 1j * _unit(PI_MINUS)
ZETA_P_PLUS = _unit(PR_PLUS) + 1j * _unit(PI_PLUS)
ZETA_A_R = _unit(AR_R) + 1j * _unit(AI_R)

Leg = Union[int, Sequence[complex], np.ndarray]


@dataclass(frozen=True)
class QuadraticExponent:
    """Coefficients of the post-channel characteristic-function exponent."""

    alpha_L: float
    alpha_R: float
    beta_L: float
    beta_R: float
    gamma_L: float
    gamma_R: float
    delta: float
    theta_L: float = 0.0
    theta_R: float = 0.0

    def matrix(self) -> np.ndarray:
        """Return ``Q`` such that the exponent equals ``-x^T Q x / 2``.

        ``Q`` is the inverse of the covariance matrix.
        """
        q = np.zeros((DIM, DIM))
        q[AR_L, AR_L] = q[AI_L, AI_L] = self.alpha_L
        q[PR_MINUS, PR_MINUS] = q[PI_MINUS, PI_MINUS] = self.beta_L
        q[PR_PLUS, PR_PLUS] = q[PI_PLUS, PI_PLUS] = self.beta_R
        q[AR_R, AR_R] = q[AI_R, AI_R] = self.alpha_R

        cl, sl = np.cos(self.theta_L), np.sin(self.theta_L)
        cr, sr = np.cos(self.theta_R), np.sin(self.theta_R)
        off = {
            # gamma_L Re{e^{i theta_L} conj(zeta_a^L) conj(zeta_p^-)}
            (AR_L, PR_MINUS): self.gamma_L * cl,
            (AI_L, PI_MINUS): -self.gamma_L * cl,
            (AR_L, PI_MINUS): self.gamma_L * sl,
            (AI_L, PR_MINUS): self.gamma_L * sl,
            # delta Re{zeta_p^+ conj(zeta_p^-)}
            (PR_MINUS, PR_PLUS): self.delta,
            (PI_MINUS, PI_PLUS): self.delta,
            # gamma_R Re{e^{i theta_R} conj(zeta_a^R) conj(zeta_p^+)}
            (AR_R, PR_PLUS): self.gamma_R * cr,
            (AI_R, PI_PLUS): -self.gamma_R * cr,
            (AR_R, PI_PLUS): self.gamma_R * sr,
            (AI_R, PR_PLUS): self.gamma_R * sr,
        }
        for (i, j), v in off.items():
            q[i, j] = q[j, i] = v
        return q


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Symmetric 8x8 covariance of the characteristic-function Gaussian.

    The stored array is a read-only, exactly symmetric copy of the input.
    """

    entries: np.ndarray

    def __post_init__(self):
        k = np.array(self.entries, dtype=float)
        if k.shape != (DIM, DIM):
            raise ValueError(f"covariance must be {DIM}x{DIM}, got {k.shape}")
        if np.max(np.abs(k - k.T)) > 1e-14 * max(1.0, np.max(np.abs(k))):
            raise ValueError("covariance matrix is not symmetric")
        k = 0.5 * (k + k.T)
        k.setflags(write=False)
        object.__setattr__(self, "entries", k)

    def __getitem__(self, idx):
        return self.entries[idx]

    @property
    def sqrt_det(self) -> float:
        return float(np.sqrt(np.linalg.det(self.entries)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


def _as_matrix(K) -> np.ndarray:
    return K.entries if isinstance(K, CovarianceMatrix) else np.asarray(K, dtype=float)


def second_moment(K, i: int, j: int) -> float:
    """Return ``E{X_i X_j} = K[i, j]``."""
    k = _as_matrix(K)
    n = k.shape[0]
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"moment index ({i}, {j}) outside 0..{n - 1}")
    return float(k[i, j])


def _leg(leg: Leg, n: int) -> np.ndarray:
    if isinstance(leg, (int, np.integer)):
        if not 0 <= leg < n:
            raise IndexError(f"moment index {leg} outside 0..{n - 1}")
        w = np.zeros(n, dtype=complex)
        w[leg] = 1.0
        return w
    w = np.asarray(leg, dtype=complex)
    if w.shape != (n,):
        raise ValueError(f"weight vector must have length {n}")
    return w


def pair_moment(K, u: Leg, v: Leg) -> complex:
    """``E{(u.x)(v.x)} = u^T K v`` for real or complex weight vectors (no conjugation)."""
    k = _as_matrix(K)
    n = k.shape[0]
    return complex(_leg(u, n) @ k @ _leg(v, n))


def fourth_moment_factored(K, a: Leg, b: Leg, c: Leg, d: Leg) -> complex | float:
    """Fourth moment of a zero-mean Gaussian by Isserlis' theorem.

    Each leg is either a component index or a weight vector, so complex
    combinations such as ``|zeta_pj|^2 |w|^2`` are expressed by passing the
    appropriate (conjugated) weights:

        E{A B C D} = E{AB} E{CD} + E{AC} E{BD} + E{AD} E{BC}
    """
    val = (
        pair_moment(K, a, b) * pair_moment(K, c, d)
        + pair_moment(K, a, c) * pair_moment(K, b, d)
        + pair_moment(K, a, d) * pair_moment(K, b, c)
    )
    legs = (a, b, c, d)
    if all(isinstance(x, (int, np.integer)) or np.isrealobj(np.asarray(x)) for x in legs):
        return float(val.real)
    return val


def invert_spd(M) -> np.ndarray:
    """Invert a symmetric positive-definite matrix through its Cholesky factor."""
    m = np.asarray(M, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.allclose(m, m.T, rtol=0, atol=1e-12 * max(1.0, np.max(np.abs(m)))):
        raise NotPositiveDefiniteError("matrix not positive definite (not symmetric)")
    try:
        factor = scipy.linalg.cho_factor(m, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix not positive definite") from exc
    inv = scipy.linalg.cho_solve(factor, np.eye(m.shape[0]))
    return 0.5 * (inv + inv.T)
