"""Two-boson quantum piston simulated through a programmable photonic mesh.

Modules: :mod:`piston` (moving-wall propagator), :mod:`oracle` (independent
eigenbasis integrator), :mod:`dilation` (single-ancilla embedding),
:mod:`mesh` (Clements compilation), :mod:`bosons` (Fock statistics),
:mod:`thermo` (work statistics and cycles), :mod:`harness` (sweeps and reports).
"""

from .bosons import FockDistribution, display_label, fock_basis, output_distribution, permanent
from .dilation import DilatedUnitary, closest_unitary, dilate_single_ancilla, unitary_error
from .errors import (
    BasisMismatchError,
    ConfigError,
    CoverageError,
    CutoffWarning,
    DomainError,
    GeometryError,
    NonUnitaryError,
    NormalizationError,
    NormDriftError,
    PhotonNumberError,
    PistonForgeError,
    QuadratureError,
    SpectralError,
)
from .mesh import MeshProgram, MziSetting, decompose, embed_submesh, reconstruct
from .pipeline import simulate_stroke
from .piston import PistonProtocol, adiabaticity_parameter, transition_amplitude, truncated_matrix
from .thermo import (
    WorkDistribution,
    bhattacharyya,
    free_energy_theory,
    gibbs_weights,
    jarzynski_estimator,
    run_cycle,
    work_distribution,
)

__all__ = [
    "BasisMismatchError", "ConfigError", "CoverageError", "CutoffWarning", "DilatedUnitary",
    "DomainError", "FockDistribution", "GeometryError", "MeshProgram", "MziSetting",
    "NonUnitaryError", "NormDriftError", "NormalizationError", "PhotonNumberError",
    "PistonForgeError", "PistonProtocol", "QuadratureError", "SpectralError", "WorkDistribution",
    "adiabaticity_parameter", "bhattacharyya", "closest_unitary", "decompose", "dilate_single_ancilla",
    "display_label", "embed_submesh", "fock_basis", "free_energy_theory", "gibbs_weights",
    "jarzynski_estimator", "output_distribution", "permanent", "reconstruct", "run_cycle",
    "simulate_stroke", "transition_amplitude", "truncated_matrix", "unitary_error", "work_distribution",
]
