"""Single-site entanglement in Hubbard chains.

Library + CLI comparing the von Neumann and linear entropies on
homogeneous, disordered and superlattice one-dimensional Hubbard
chains, with an exact-diagonalization oracle for small systems.
"""

__version__ = "0.1.0"

from .chains import ChainSpec, Disorder, Homogeneous, PotentialSpec, Superlattice, build_potential, impurity_count
from .entropy import OccupationProbabilities, linear, minimal_monotone_order, probs_from_density, taylor_entropy, von_neumann
from .fvc import double_occupancy, e0_fvc, homogeneous_entropies, lieb_wu_rhs, solve_b
from .ed import FockBasis, GroundState, apply_hamiltonian, density_profile, ground_state, site_probabilities
from .scf import DensityProfile, EntropyReport, ScfConfig, disorder_ensemble, lda_entropies, solve_scf, xc_potential

__all__ = [
    "ChainSpec", "Disorder", "Homogeneous", "PotentialSpec", "Superlattice",
    "build_potential", "impurity_count",
    "OccupationProbabilities", "probs_from_density", "von_neumann", "linear",
    "taylor_entropy", "minimal_monotone_order",
    "lieb_wu_rhs", "solve_b", "e0_fvc", "double_occupancy", "homogeneous_entropies",
    "FockBasis", "GroundState", "apply_hamiltonian", "ground_state",
    "site_probabilities", "density_profile",
    "ScfConfig", "DensityProfile", "EntropyReport", "xc_potential", "solve_scf",
    "lda_entropies", "disorder_ensemble",
]
