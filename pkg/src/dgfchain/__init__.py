"""Two-species SSH chain with a density-dependent gauge hop."""

__version__ = "0.1.0"

from .basis import BOSON, FERMION, BasisSpec, StateIndexer, build_basis
from .params import ModelParams, GaugeTransform, apply_gauge_transform, OPEN, PERIODIC
from .operators import (
    OperatorMatrix,
    build_hamiltonian,
    build_species_hamiltonian,
    build_loss,
    build_dgf,
    build_nrh,
    build_disorder,
    build_number_operator,
    reversal_operator,
    translation_operator,
    gauge_sign_operator,
)
from .spectral import (
    EigenSystem,
    eigensystem,
    pt_pairing_report,
    condition_number,
    petermann_factor,
    pt_defect,
)
from .observables import (
    StateVector,
    density_profile,
    biorthogonal_density,
    biorthogonal_profile,
    edge_imbalance,
    entanglement_entropy,
    interspecies_correlation,
    intraspecies_correlation,
    mean_position,
    diagonal_mass,
)
from .topology import (
    BlochData,
    PhaseLabel,
    CriticalParameterError,
    bloch_data,
    bloch_phase,
    bloch_state,
    band_energy,
    momentum_grid,
    single_particle_indicators,
    interspecies_invariants,
    classify_phase,
    m_matrix,
    dgf_magnitude,
    bbs_a2,
    bbs_energy,
    ansatz_states,
    ansatz_two_level,
)
from .meanfield import (
    MeanFieldModel,
    left_edge_state,
    effective_down_hamiltonian,
    meanfield_report,
)
from .dynamics import (
    Trajectory,
    propagate,
    trajectory_observables,
    time_averaged_density,
)

__all__ = [
    "BOSON", "FERMION", "BasisSpec", "StateIndexer", "build_basis",
    "ModelParams", "GaugeTransform", "apply_gauge_transform", "OPEN", "PERIODIC",
    "OperatorMatrix", "build_hamiltonian", "build_species_hamiltonian",
    "build_loss", "build_dgf", "build_nrh", "build_disorder",
    "build_number_operator", "reversal_operator", "translation_operator",
    "gauge_sign_operator",
    "EigenSystem", "eigensystem", "pt_pairing_report", "condition_number",
    "petermann_factor", "pt_defect",
    "StateVector", "density_profile", "biorthogonal_density", "biorthogonal_profile",
    "edge_imbalance", "entanglement_entropy", "interspecies_correlation",
    "intraspecies_correlation", "mean_position", "diagonal_mass",
    "BlochData", "PhaseLabel", "CriticalParameterError", "bloch_data",
    "bloch_phase", "bloch_state", "band_energy", "momentum_grid",
    "single_particle_indicators", "interspecies_invariants", "classify_phase",
    "m_matrix", "dgf_magnitude", "bbs_a2", "bbs_energy", "ansatz_states",
    "ansatz_two_level",
    "MeanFieldModel", "left_edge_state", "effective_down_hamiltonian",
    "meanfield_report",
    "Trajectory", "propagate", "trajectory_observables", "time_averaged_density",
]
