"""Quantum interferometric power as a witness of non-Markovian qubit dynamics."""
from ._kernels import USE_NUMBA
from .channels import (ChannelTrajectory, LorentzianSpectralDensity, MapDescriptor,
                       OhmicSpectralDensity, apply_amplitude_damping_joint,
                       apply_amplitude_damping_system, apply_dephasing_joint, apply_dephasing_system,
                       choi_matrix, damping_trajectory, dephasing_factor, dephasing_trajectory,
                       evolve_joint, evolve_system, intermediate_map, lorentzian_jt, memory_kernel,
                       ohmic_rate, solve_volterra, solve_volterra_jt)
from .errors import InvalidInputError, NumericalFailureError, SingularMapError
from .qip import (LocalHamiltonian, fisher_information, qip, qip_batch, qip_bruteforce, qip_sqrt,
                  w_matrix)
from .states import (DensityMatrix, bell_phi, concurrence, mutual_information, trace_distance,
                     von_neumann_entropy, werner)
from .witnesses import (InitialStateFamily, MeasureReport, backflow_measure, n_blp, n_mutual, n_q,
                        n_q_dephasing_analytic, n_rhp, optimize_initial_state, qip_flow)

__version__ = "0.1.0"

__all__ = [
    "ChannelTrajectory",
    "DensityMatrix",
    "InitialStateFamily",
    "InvalidInputError",
    "LocalHamiltonian",
    "LorentzianSpectralDensity",
    "MapDescriptor",
    "MeasureReport",
    "NumericalFailureError",
    "OhmicSpectralDensity",
    "SingularMapError",
    "USE_NUMBA",
    "apply_amplitude_damping_joint",
    "apply_amplitude_damping_system",
    "apply_dephasing_joint",
    "apply_dephasing_system",
    "backflow_measure",
    "bell_phi",
    "choi_matrix",
    "concurrence",
    "damping_trajectory",
    "dephasing_factor",
    "dephasing_trajectory",
    "evolve_joint",
    "evolve_system",
    "fisher_information",
    "intermediate_map",
    "lorentzian_jt",
    "memory_kernel",
    "mutual_information",
    "n_blp",
    "n_mutual",
    "n_q",
    "n_q_dephasing_analytic",
    "n_rhp",
    "ohmic_rate",
    "optimize_initial_state",
    "qip",
    "qip_batch",
    "qip_bruteforce",
    "qip_flow",
    "qip_sqrt",
    "solve_volterra",
    "solve_volterra_jt",
    "trace_distance",
    "von_neumann_entropy",
    "w_matrix",
    "werner",
]
