"""Repeated-interaction (collision model) simulation of open-system
electron transfer, with a Lindblad reference integrator, product-formula
propagation, collision-based state preparation and an entanglement-based
non-Markovianity measure."""

from .analysis import (
    RateFit,
    RHPResult,
    build_rhp_system,
    concurrence_backflow,
    fit_transfer_rate,
    rhp_measure,
    truncation_study,
)
from .dynamics import (
    IntegrationDivergedError,
    RIConfig,
    Trajectory,
    UnsupportedModelError,
    build_ri_unitary,
    build_trotter_unitary,
    evolve_ri,
    integrate_lindblad,
    lindblad_rhs,
    ri_step,
    run_state_preparation,
)
from .linops import (
    DensityMatrix,
    EigenDecomposition,
    Operator,
    concurrence,
    expm_i_herm,
    expm_nilpotent2,
    fidelity,
    herm_eig,
    identity,
    kron,
    partial_trace,
    sqrt_psd,
)
from .model import (
    ModelParams,
    SystemOperators,
    build_ancilla_state,
    build_da,
    build_dba,
    build_initial_state,
    oscillator_ops,
    thermal_occupation,
)

__version__ = "0.1.0"
