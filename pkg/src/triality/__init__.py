"""Single-photon two-beam interference with a polarization tag.

Simulates preparation of path (x) polarization states in a Mach-Zehnder
layout and measures visibility ``V``, distinguishability ``D`` and
concurrence ``C``, which obey ``V**2 + D**2 + C**2 == 1`` for pure states.
"""

__version__ = "0.1.0"

from .linalg import hermitian_eig, partial_trace, tensor
from .metrics import (
    FringeFit,
    VDCTriple,
    concurrence_pure,
    concurrence_wootters,
    distinguishability_from_blocking,
    duality_gap,
    identity_residual,
    vdc_closed_form,
    visibility_from_scan,
)
from .optics import block_path, element_unitary, fringe_scan, run_preparation
from .states import DensityMatrix, PreparationParams, PureState, density_of, gamma_overlap, prepare_state
from .targets import TargetPoint, equal_coherence_state, solve_params, table1_targets
from .tomography import (
    LinearInversionTomography,
    MaximumLikelihoodTomography,
    fidelity,
    reconstruct_linear,
    reconstruct_mle,
    simulate_counts,
    standard_settings,
)

__all__ = [
    "DensityMatrix", "FringeFit", "LinearInversionTomography", "MaximumLikelihoodTomography",
    "PreparationParams", "PureState", "TargetPoint", "VDCTriple",
    "block_path", "concurrence_pure", "concurrence_wootters", "density_of",
    "distinguishability_from_blocking", "duality_gap", "element_unitary", "equal_coherence_state",
    "fidelity", "fringe_scan", "gamma_overlap", "hermitian_eig", "identity_residual",
    "partial_trace", "prepare_state", "reconstruct_linear", "reconstruct_mle", "run_preparation",
    "simulate_counts", "solve_params", "standard_settings", "table1_targets", "tensor",
    "vdc_closed_form", "visibility_from_scan",
]
