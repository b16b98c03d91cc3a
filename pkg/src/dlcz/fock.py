"""Brute-force truncated Fock-space engine used as an independent oracle.

States are stored as an incoherent mixture of pure branches,
``rho = sum_b |psi_b><psi_b|``; the amplitude array has a leading branch axis
followed by one axis per labelled mode, each of size ``n_max + 1``.  Loss
against a vacuum ancilla and imperfect detection both turn into extra
branches, so no density matrix is ever formed.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .channel import ChannelParams
from .errors import ParameterError, TruncationWarning, ZeroProbabilityError
from .herald import DetectionScheme, HeraldReport, PNRD
from .protocols import MeasurementModule, ProtocolReport


@dataclass(frozen=True, eq=False)
class FockTensor:
    amplitudes: np.ndarray
    mode_labels: tuple[str, ...]
    n_max: int

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        labels = tuple(self.mode_labels)
        if len(set(labels)) != len(labels):
            raise ParameterError(f"duplicate mode labels {labels}")
        if amp.ndim != len(labels) + 1:
            raise ParameterError("amplitudes need a branch axis plus one axis per mode")
        if any(n != self.n_max + 1 for n in amp.shape[1:]):
            raise ParameterError(f"every mode axis must have size n_max + 1 = {self.n_max + 1}")
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "mode_labels", labels)

    @property
    def branches(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def dim(self) -> int:
        return self.n_max + 1

    def axis(self, label: str) -> int:
        """Array axis of ``label`` (branch axis is 0)."""
        try:
            return self.mode_labels.index(label) + 1
        except ValueError:
            raise ParameterError(f"unknown mode label {label!r}") from None

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def photon_distribution(self, label: str) -> np.ndarray:
        """Marginal photon-number probabilities of one mode."""
        ax = self.axis(label)
        p = np.abs(self.amplitudes) ** 2
        other = tuple(i for i in range(p.ndim) if i != ax)
        return p.sum(axis=other)

    def total_photons(self, labels: Iterable[str]) -> np.ndarray:
        """Per-entry photon count summed over ``labels`` (broadcast over the mode axes)."""
        grids = np.indices(self.amplitudes.shape[1:])
        return sum(grids[self.axis(lab) - 1] for lab in labels)

    def relabel(self, mapping: Mapping[str, str]) -> "FockTensor":
        labels = tuple(mapping.get(lab, lab) for lab in self.mode_labels)
        return FockTensor(self.amplitudes, labels, self.n_max)


def tail_bound(p_c: float, n_max: int) -> float:
    """Probability mass of a two-mode squeezed source beyond ``n_max`` pairs."""
    return p_c ** (n_max + 1)


def combined_tail_bound(p_cs: Sequence[float], n_max: int) -> float:
    keep = 1.0
    for p in p_cs:
        keep *= 1.0 - tail_bound(p, n_max)
    return 1.0 - keep


def _prune(amp: np.ndarray) -> np.ndarray:
    flat = amp.reshape(amp.shape[0], -1)
    live = np.any(flat != 0, axis=1)
    if live.all():
        return amp
    if not live.any():
        return amp[:1] * 0
    return amp[live]


def vacuum(labels: Sequence[str], n_max: int) -> FockTensor:
    amp = np.zeros((1,) + (n_max + 1,) * len(labels), dtype=complex)
    amp[(0,) * amp.ndim] = 1.0
    return FockTensor(amp, tuple(labels), n_max)


def from_amplitudes(
    labels: Sequence[str], amplitudes: Mapping[tuple[int, ...], complex], n_max: int
) -> FockTensor:
    """Pure state from ``{(n_1, ..., n_k): amplitude}``."""
    amp = np.zeros((1,) + (n_max + 1,) * len(labels), dtype=complex)
    for idx, a in amplitudes.items():
        if len(idx) != len(labels) or any(not 0 <= n <= n_max for n in idx):
            raise ParameterError(f"occupation {idx} invalid for modes {labels} at n_max={n_max}")
        amp[(0,) + tuple(idx)] += a
    return FockTensor(amp, tuple(labels), n_max)


def tensor(a: FockTensor, b: FockTensor) -> FockTensor:
    """Product state; branches combine pairwise."""
    if a.n_max != b.n_max:
        raise ParameterError("cannot combine tensors with different n_max")
    shape_a, shape_b = a.amplitudes.shape, b.amplitudes.shape
    amp = (
        a.amplitudes.reshape(shape_a[0], 1, -1, 1)
        * b.amplitudes.reshape(1, shape_b[0], 1, -1)
    ).reshape((shape_a[0] * shape_b[0],) + shape_a[1:] + shape_b[1:])
    return FockTensor(amp, a.mode_labels + b.mode_labels, a.n_max)


def build_tms(
    p_c: float, theta: float, n_max: int, labels: tuple[str, str] = ("atom", "photon")
) -> FockTensor:
    """Two-mode squeezed vacuum ``sum_n sqrt(1-p_c) (sqrt(p_c) e^{i theta})^n |n, n>``."""
    if not 0.0 <= p_c < 1.0:
        raise ParameterError("excitation probability must be in [0, 1)")
    if n_max < 1:
        raise ParameterError("n_max must be >= 1")
    amp = np.zeros((1, n_max + 1, n_max + 1), dtype=complex)
    step = math.sqrt(p_c) * complex(math.cos(theta), math.sin(theta))
    n = np.arange(n_max + 1)
    amp[0, n, n] = math.sqrt(1.0 - p_c) * step**n
    return FockTensor(amp, labels, n_max)


def _loss_coefficients(eta: float, d: int) -> np.ndarray:
    """``c[n, l] = sqrt(C(n, l) eta^(n-l) (1-eta)^l)`` for ``l`` photons lost out of ``n``."""
    c = np.zeros((d, d))
    for n in range(d):
        for lost in range(n + 1):
            c[n, lost] = math.sqrt(math.comb(n, lost) * eta ** (n - lost) * (1.0 - eta) ** lost)
    return c


def apply_loss(t: FockTensor, mode: str, eta: float, ancilla: Optional[str] = None) -> FockTensor:
    """Mix ``mode`` with a vacuum ancilla on a splitter of transmissivity ``eta``.

    With ``ancilla`` given the ancilla is kept as a new trailing mode;
    otherwise it is traced out immediately by folding the lost-photon count
    into the branch axis.
    """
    if not 0.0 <= eta <= 1.0:
        raise ParameterError(f"transmissivity {eta!r} outside [0, 1]")
    ax = t.axis(mode)
    d = t.dim
    coef = _loss_coefficients(eta, d)
    src = np.moveaxis(t.amplitudes, ax, -1)
    out = np.zeros((d,) + src.shape, dtype=complex)  # leading axis: photons lost
    for lost in range(d):
        kept = np.arange(d - lost)
        out[lost][..., kept] = src[..., kept + lost] * coef[kept + lost, lost]
    out = np.moveaxis(out, -1, ax + 1)  # restore mode position (shifted by lost axis)
    if ancilla is not None:
        if ancilla in t.mode_labels:
            raise ParameterError(f"ancilla label {ancilla!r} already in use")
        amp = np.moveaxis(out, 0, -1)
        return FockTensor(amp, t.mode_labels + (ancilla,), t.n_max)
    amp = np.swapaxes(out, 0, 1).reshape((-1,) + t.amplitudes.shape[1:])
    return FockTensor(_prune(amp), t.mode_labels, t.n_max)


@functools.lru_cache(maxsize=None)
def _splitter_block(total: int, sign: int) -> np.ndarray:
    """Matrix ``M[m, n]``: amplitude of output ``|m, total-m>`` for input ``|n, total-n>``.

    Creation operators map as ``a^+ -> (s o1^+ + o2^+)/sqrt2`` and
    ``b^+ -> (o1^+ - s o2^+)/sqrt2``.
    """
    s = sign
    m_out = np.zeros((total + 1, total + 1))
    for n_a in range(total + 1):
        n_b = total - n_a
        # integer coefficient of o1^m1 o2^(total-m1) in (s o1 + o2)^n_a (o1 - s o2)^n_b
        poly = [0] * (total + 1)
        for k in range(n_a + 1):
            c_a = math.comb(n_a, k) * s**k
            for q in range(n_b + 1):
                poly[k + q] += c_a * math.comb(n_b, q) * (-s) ** (n_b - q)
        for m1 in range(total + 1):
            if poly[m1] == 0:
                continue
            ratio = Fraction(math.factorial(m1) * math.factorial(total - m1),
                             math.factorial(n_a) * math.factorial(n_b) * 2**total)
            m_out[m1, n_a] = poly[m1] * math.sqrt(ratio)
    return m_out


def apply_5050(
    t: FockTensor,
    mode_a: str,
    mode_b: str,
    sign: int = -1,
    out_labels: Optional[tuple[str, str]] = None,
) -> FockTensor:
    """Balanced beam splitter on two modes.

    ``sign=-1`` gives ``out1 = (b - a)/sqrt2`` and ``out2 = (a + b)/sqrt2``;
    ``sign=+1`` gives ``out1 = (a + b)/sqrt2`` and ``out2 = (a - b)/sqrt2``.
    ``out1`` replaces ``mode_a`` and ``out2`` replaces ``mode_b``.  Output
    occupations above ``n_max`` are dropped.
    """
    if mode_a == mode_b:
        raise ParameterError("beam splitter needs two distinct modes")
    if sign not in (-1, 1):
        raise ParameterError("sign must be +1 or -1")
    ax_a, ax_b = t.axis(mode_a), t.axis(mode_b)
    arr = np.moveaxis(t.amplitudes, (ax_a, ax_b), (-2, -1))
    out = np.zeros_like(arr)
    n = t.n_max
    for total in range(2 * n + 1):
        lo, hi = max(0, total - n), min(total, n)
        idx = np.arange(lo, hi + 1)
        block = _splitter_block(total, sign)[np.ix_(idx, idx)]
        vec = arr[..., idx, total - idx]
        out[..., idx, total - idx] = vec @ block.T
    amp = np.moveaxis(out, (-2, -1), (ax_a, ax_b))
    res = FockTensor(amp, t.mode_labels, t.n_max)
    if out_labels is not None:
        res = res.relabel({mode_a: out_labels[0], mode_b: out_labels[1]})
    return res


def _detector_weights(scheme: DetectionScheme, outcome: int, eta: float, d: int) -> np.ndarray:
    """``P(outcome | n photons)`` for ``n = 0..d-1``."""
    n = np.arange(d)
    if scheme is PNRD:
        if outcome < 0:
            raise ParameterError("photon count outcome must be >= 0")
        return np.array(
            [math.comb(k, outcome) * eta**outcome * (1 - eta) ** (k - outcome) if k >= outcome else 0.0
             for k in n]
        )
    if outcome not in (0, 1):
        raise ParameterError("non-resolving outcome must be 0 (no click) or 1 (click)")
    miss = (1.0 - eta) ** n
    return miss if outcome == 0 else 1.0 - miss


def _project(
    t: FockTensor,
    detectors: Sequence[str],
    scheme: DetectionScheme,
    outcome: Sequence[int],
    efficiencies: Optional[Sequence[float]],
) -> tuple[np.ndarray, tuple[str, ...]]:
    scheme = DetectionScheme.parse(scheme)
    if len(detectors) != len(outcome):
        raise ParameterError("one outcome per detector required")
    if len(set(detectors)) != len(detectors):
        raise ParameterError("duplicate detector modes")
    effs = list(efficiencies) if efficiencies is not None else [1.0] * len(detectors)
    axes = [t.axis(lab) for lab in detectors]
    amp = np.moveaxis(t.amplitudes, axes, list(range(1, 1 + len(axes))))
    for i, (k, eta) in enumerate(zip(outcome, effs)):
        w = np.sqrt(_detector_weights(scheme, k, eta, t.dim))
        shape = [1] * amp.ndim
        shape[1 + i] = t.dim
        amp = amp * w.reshape(shape)
    rest = tuple(lab for lab in t.mode_labels if lab not in detectors)
    # each detector photon number becomes its own branch
    amp = amp.reshape((-1,) + amp.shape[1 + len(axes):])
    return amp, rest


def outcome_probability(
    t: FockTensor,
    detectors: Sequence[str],
    scheme: DetectionScheme,
    outcome: Sequence[int],
    efficiencies: Optional[Sequence[float]] = None,
) -> float:
    amp, _ = _project(t, detectors, scheme, outcome, efficiencies)
    return float(np.sum(np.abs(amp) ** 2))


def measure(
    t: FockTensor,
    detectors: Sequence[str],
    scheme: DetectionScheme,
    outcome: Sequence[int],
    efficiencies: Optional[Sequence[float]] = None,
) -> tuple[float, FockTensor]:
    """Probability of a detection pattern and the normalized state of the other modes.

    PNRD outcomes are detected photon counts; NRPD outcomes are 0 (no click)
    or 1 (click).  Finite detector efficiency is modelled by binomial thinning
    of the incident photon number.
    """
    amp, rest = _project(t, detectors, scheme, outcome, efficiencies)
    prob = float(np.sum(np.abs(amp) ** 2))
    if prob <= 0.0:
        raise ZeroProbabilityError(f"outcome {tuple(outcome)} on {tuple(detectors)} has zero probability")
    amp = _prune(amp) / math.sqrt(prob)
    return prob, FockTensor(amp, rest, t.n_max)


def fidelity(t: FockTensor, target: FockTensor) -> float:
    """``<target| rho |target>`` for a single-branch target on the same modes."""
    if target.branches != 1:
        raise ParameterError("target must be a pure state")
    if target.mode_labels != t.mode_labels:
        order = [target.axis(lab) - 1 for lab in t.mode_labels]
        tgt = np.transpose(target.amplitudes[0], order)
    else:
        tgt = target.amplitudes[0]
    overlaps = t.amplitudes.reshape(t.branches, -1) @ np.conj(tgt.reshape(-1))
    return float(np.sum(np.abs(overlaps) ** 2))


def restricted_density(t: FockTensor, basis: Sequence[tuple[int, ...]]) -> np.ndarray:
    """Density matrix elements ``<i|rho|j>`` between the listed occupation tuples."""
    cols = np.stack([t.amplitudes[(slice(None),) + tuple(idx)] for idx in basis], axis=1)
    return cols.T @ np.conj(cols)


# distribution


@functools.lru_cache(maxsize=4)
def _distribution_state(
    p_cL: float, p_cR: float, eta_L: float, eta_R: float,
    theta_L: float, theta_R: float, n_max: int,
) -> FockTensor:
    left = apply_loss(build_tms(p_cL, theta_L, n_max, ("aL", "pL")), "pL", eta_L)
    right = apply_loss(build_tms(p_cR, theta_R, n_max, ("aR", "pR")), "pR", eta_R)
    return apply_5050(tensor(left, right), "pL", "pR", sign=-1, out_labels=("D1", "D2"))


def distribution_state(cp: ChannelParams, n_max: int = 12) -> FockTensor:
    """Joint state of both ensembles and the two detector modes before detection."""
    return _distribution_state(
        cp.p_cL, cp.p_cR, cp.eta_L, cp.eta_R, cp.theta_L, cp.theta_R, n_max
    )


def _herald_pattern(scheme: DetectionScheme, j: int) -> tuple[int, int]:
    return (1, 0) if j == 1 else (0, 1)


def _check_depth(cp: ChannelParams, n_max: int, tol: Optional[float]) -> None:
    if tol is not None and combined_tail_bound((cp.p_cL, cp.p_cR), n_max) > tol:
        warnings.warn(
            f"n_max={n_max} leaves tail mass above tolerance {tol:g}", TruncationWarning, stacklevel=3
        )


def oracle_heralded_state(
    cp: ChannelParams, s: DetectionScheme, j: int, n_max: int = 12
) -> tuple[float, FockTensor]:
    """Herald probability of detector ``j`` and the two-ensemble state it leaves."""
    t = distribution_state(cp, n_max)
    return measure(
        t, ("D1", "D2"), DetectionScheme.parse(s), _herald_pattern(s, j), (cp.eta_1, cp.eta_2)
    )


def _qubit_target(d_L: complex, d_R: complex, n_max: int) -> FockTensor:
    return from_amplitudes(("aL", "aR"), {(1, 0): d_L, (0, 1): d_R}, n_max)


def oracle_fidelity_arbitrary(
    cp: ChannelParams, s: DetectionScheme, j: int, d_L: complex, d_R: complex, n_max: int = 12
) -> float:
    _, post = oracle_heralded_state(cp, s, j, n_max)
    return fidelity(post, _qubit_target(d_L, d_R, n_max))


def oracle_distribution(
    cp: ChannelParams, s: DetectionScheme, n_max: int = 12, tol: Optional[float] = None
) -> HeraldReport:
    """Distribution metrics by exact enumeration of the truncated state.

    The optimal target and its fidelity come from the largest eigenpair of the
    heralded density matrix restricted to one shared excitation.
    """
    s = DetectionScheme.parse(s)
    _check_depth(cp, n_max, tol)
    t = distribution_state(cp, n_max)
    probs, fids, opts, coeffs = [], [], [], []
    p_success = 0.0
    for j in (1, 2):
        p = outcome_probability(t, ("D1", "D2"), s, _herald_pattern(s, j), (cp.eta_1, cp.eta_2))
        probs.append(p)
        if p <= 0.0:
            fids.append(None)
            opts.append(None)
            continue
        _, post = measure(t, ("D1", "D2"), s, _herald_pattern(s, j), (cp.eta_1, cp.eta_2))
        sign = (-1) ** j
        f = fidelity(post, _qubit_target(1 / math.sqrt(2), sign / math.sqrt(2), n_max))
        fids.append(f)
        p_success += p * f
        rho = restricted_density(post, [(1, 0), (0, 1)])
        w, v = np.linalg.eigh(rho)
        vec = v[:, -1]
        vec = vec * np.exp(-1j * np.angle(vec[0])) if abs(vec[0]) > 0 else vec
        opts.append(float(w[-1]))
        coeffs.append((complex(vec[0]), complex(vec[1])))
    return HeraldReport(
        P1=probs[0], P2=probs[1], F1=fids[0], F2=fids[1], P_success=p_success,
        F_opt1=opts[0], F_opt2=opts[1],
        opt_coeffs=tuple(coeffs) if len(coeffs) == 2 else None,
    )


# repeater and teleportation


def _singlet(a: str, b: str, n_max: int) -> FockTensor:
    r = 1 / math.sqrt(2)
    return from_amplitudes((a, b), {(1, 0): r, (0, 1): -r}, n_max)


def _bell_module(t: FockTensor, a: str, b: str, m: MeasurementModule, names: tuple[str, str]) -> FockTensor:
    t = apply_loss(t, a, m.eta_c)
    t = apply_loss(t, b, m.eta_c)
    return apply_5050(t, a, b, sign=-1, out_labels=names)


def oracle_swap(m: MeasurementModule, n_max: int = 3) -> ProtocolReport:
    """Entanglement swap of two ideal singlets, enumerated."""
    t = tensor(_singlet("L1", "R1", n_max), _singlet("L2", "R2", n_max))
    t = _bell_module(t, "R1", "L2", m, ("D1", "D2"))
    effs = (m.eta_d, m.eta_d)
    p_herald = p_success = 0.0
    r = 1 / math.sqrt(2)
    for j in (1, 2):
        pattern = _herald_pattern(m.scheme, j)
        p = outcome_probability(t, ("D1", "D2"), m.scheme, pattern, effs)
        if p <= 0.0:
            continue
        _, post = measure(t, ("D1", "D2"), m.scheme, pattern, effs)
        target = from_amplitudes(("L1", "R2"), {(1, 0): r, (0, 1): (-1) ** j * r}, n_max)
        p_herald += p
        p_success += p * fidelity(post, target)
    return ProtocolReport(P_herald=p_herald, P_success=p_success)


def teleport_state(m: MeasurementModule, d0: complex, d1: complex, n_max: int = 3) -> FockTensor:
    """State after both measurement splitters, before detection."""
    if abs(abs(d0) ** 2 + abs(d1) ** 2 - 1.0) > 1e-12:
        raise ParameterError("qubit amplitudes must be normalized")
    qubit = from_amplitudes(("I1", "I2"), {(1, 0): d0, (0, 1): d1}, n_max)
    t = tensor(qubit, tensor(_singlet("L1", "R1", n_max), _singlet("L2", "R2", n_max)))
    t = _bell_module(t, "L1", "I1", m, ("U1", "U2"))
    return _bell_module(t, "L2", "I2", m, ("V1", "V2"))


def oracle_teleport(m: MeasurementModule, d0: complex, d1: complex, n_max: int = 3) -> ProtocolReport:
    """Conditional teleportation, enumerated over the four herald patterns."""
    t = teleport_state(m, d0, d1, n_max)
    dets = ("U1", "U2", "V1", "V2")
    effs = (m.eta_d,) * 4
    p_herald = p_success = 0.0
    for j in (1, 2):
        for k in (1, 2):
            pattern = _herald_pattern(m.scheme, j) + _herald_pattern(m.scheme, k)
            p = outcome_probability(t, dets, m.scheme, pattern, effs)
            if p <= 0.0:
                continue
            _, post = measure(t, dets, m.scheme, pattern, effs)
            sign = 1 if j == k else -1
            target = from_amplitudes(("R1", "R2"), {(1, 0): d0, (0, 1): sign * d1}, n_max)
            p_herald += p
            p_success += p * fidelity(post, target)
    return ProtocolReport(P_herald=p_herald, P_success=p_success)
