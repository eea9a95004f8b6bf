"""Exact pure-dephasing dynamics of spin subsystems in pairwise-ZZ ensembles.

The package computes the exact reduced dynamics of p spins embedded in an
N-spin ensemble with arbitrary symmetric ZZ couplings and longitudinal
fields, the geometric non-Markovianity witness det M_S(t) with episode
detection, its analytic specializations (nearest-neighbor ring, infinite
range, power law, 2D torus, thermodynamic limits), thermal environments,
the single-spin RHP/BLP comparison, system-environment negativity, and a
brute-force global-unitary oracle for verification.
"""

from .closedforms import (
    BinomialTable,
    chu_vandermonde_exponent,
    log_det_2d_nn,
    log_det_infinite_fraction_asymptotic,
    log_det_infinite_range,
    log_det_nn_1d,
    log_det_power_law,
    multiplicity_sum_si,
)
from .engine import (
    DephasingSpectrum,
    EnvPopulations,
    WitnessEvaluator,
    WitnessSeries,
    bloch_evolution_matrix,
    bloch_to_density,
    bloch_vector,
    dephasing_factor,
    dephasing_factor_derivative,
    dephasing_spectrum,
    detect_episodes,
    populations_from_density,
    reduced_state,
    witness_log_det,
)
from .entanglement import (
    evolve_global,
    negativity,
    negativity_details,
    partial_trace_env,
    partial_transpose_system,
    system_internal_negativity,
    trace_norm,
)
from .linalg import hermitian_eigensystem, hermitian_eigenvalues, lu_det
from .model import (
    DEFAULT_ENUM_CAP,
    CouplingModel,
    EnsembleSpec,
    ExplicitCoupling,
    InfiniteRange,
    NearestNeighborRing1D,
    NearestNeighborTorus2D,
    PowerLawRing1D,
    ResourceCapError,
    SpinConfig,
    build_coupling,
    config_index,
    config_matrix,
    ensemble_from_dict,
    ensemble_from_model,
    enumerate_configs,
    hamiltonian_env,
    hamiltonian_interaction,
    hamiltonian_system,
    hamiltonian_total,
    load_ensemble,
    torus_block_ensemble,
)
from .oracle import oracle_reduced_state, oracle_superoperator, run_verification
from .qubit import (
    MeasuresReport,
    QubitState,
    amplitude,
    amplitude_derivative,
    blp_trace_distance,
    dephasing_rate,
    measures_agreement_report,
    qubit_state,
)
from .thermal import (
    ThermalPopulations,
    basis_state,
    ground_state_populations,
    maximally_mixed,
    thermal_populations,
)

__version__ = "0.1.0"
