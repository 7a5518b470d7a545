"""Qubit initial-state preparation by nonselective measurements on an overcomplete basis."""

__version__ = "0.1.0"

from .basis import (
    EulerAngles,
    MeasurementSet,
    PhiVector,
    PsiVector,
    StateVector,
    gram_diagonality_residual,
    gram_operator,
    phi_from_angles,
    psi_from_angles,
    resolution_residual,
)
from .errors import Diagnostic, PovmPrepError
from .preparation import ThermalParams, a_factor, initial_coherence_formula, reduced_density
from .purity import (
    OverlapMatrix,
    brute_force_min,
    extremal_probabilities,
    max_self_consistent_kT,
    overlap_matrix,
    purity_bilinear,
    temperature_sweep,
)
from .repeated import evaluate_scheme, srm_scheme, srm_vectors, transfer_matrix

__all__ = [
    "Diagnostic", "EulerAngles", "MeasurementSet", "OverlapMatrix", "PhiVector", "PovmPrepError",
    "PsiVector", "StateVector", "ThermalParams", "a_factor", "brute_force_min", "evaluate_scheme",
    "extremal_probabilities", "gram_diagonality_residual", "gram_operator", "initial_coherence_formula",
    "max_self_consistent_kT", "overlap_matrix", "phi_from_angles", "psi_from_angles", "purity_bilinear",
    "reduced_density", "resolution_residual", "srm_scheme", "srm_vectors", "temperature_sweep",
    "transfer_matrix",
]
