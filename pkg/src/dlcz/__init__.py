"""Performance metrics for atomic-ensemble (DLCZ) quantum communication.

Closed-form heralding probabilities and fidelities for entanglement
distribution, swapping and teleportation, a truncated Fock-space oracle that
checks them by enumeration, and a comparison against a trapped-atom
architecture.
"""

from __future__ import annotations

from .channel import (
    ChannelParams,
    SymmetricParams,
    covariance_from_params,
    exponent_coefficients,
)
from .errors import (
    ConfigError,
    DLCZError,
    NotPositiveDefiniteError,
    ParameterError,
    TruncationWarning,
    UndefinedFidelityError,
    ZeroProbabilityError,
)
from .fock import FockTensor, oracle_distribution, oracle_swap, oracle_teleport
from .gaussian import CovarianceMatrix, QuadraticExponent, fourth_moment_factored, invert_spd, second_moment
from .herald import (
    NRPD,
    PNRD,
    DetectionScheme,
    HeraldReport,
    fidelity_arbitrary,
    fidelity_singlet_triplet,
    herald_report,
    heralding_probability,
    optimal_state,
    phase_averaged_fidelity,
    success_probability,
)
from .mitnu import LinkGeometry, MitNuParams, mitnu_metrics, mitnu_moments, phase_averaged_mitnu, throughput_comparison
from .protocols import MeasurementModule, ProtocolReport, repeater_metrics, swap_component_probabilities, teleport_metrics
from .source import PumpParams, SourceState, pc_to_source, pump_to_source

__version__ = "0.1.0"
