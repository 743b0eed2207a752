"""Spin-network algebra and quantum circuits for level-k deformed SU(2) gauge theory on the lattice."""

from snaq.circuit import (
    Circuit,
    ComplexityReport,
    Gate,
    SpectralTable,
    circuit_from_json,
    circuit_to_json,
    circuit_unitary,
    compile_evolution,
    complexity_bound,
    dense_simulate,
    expand_multicontrolled,
    fix_qudits,
    fmove_unitary,
    g_gate,
    gate_count,
    hexagon_plaquette_circuit,
    lower_circuit,
    plaquette_exponential_error,
    plaquette_fmove_sequence,
    step_exponential_error,
    tadpole_conjugation_error,
    trotter_plaquette_step,
    trotter_step_second_order,
)
from snaq.qalgebra import (
    FTable,
    Level,
    classical_6j,
    f_matrix,
    is_admissible,
    q_factorial,
    q_number,
    quantum_dimension,
    racah_q6j,
    verify_identities,
)
from snaq.spinnet import (
    EmptyBasisError,
    Face,
    HamiltonianMatrix,
    SNBasis,
    SpinNetwork,
    build_hamiltonian,
    diagonalize,
    electric_energy,
    enumerate_basis,
    hexagon_network,
    mathieu_oracle,
    plaquette_operator,
    single_plaquette_network,
    torus_network,
)
from snaq.variational import (
    FitResult,
    OptimizeResult,
    PhaseScanResult,
    brute_force_energy,
    default_scan_grid,
    energy_gradient,
    fit_critical_law,
    mean_energy,
    mean_plaquette,
    optimize,
    phase_scan,
    product_state_vector,
    torus_product_energy,
)

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "ComplexityReport",
    "EmptyBasisError",
    "FTable",
    "Face",
    "FitResult",
    "Gate",
    "HamiltonianMatrix",
    "Level",
    "OptimizeResult",
    "PhaseScanResult",
    "SNBasis",
    "SpectralTable",
    "SpinNetwork",
    "brute_force_energy",
    "build_hamiltonian",
    "circuit_from_json",
    "circuit_to_json",
    "circuit_unitary",
    "classical_6j",
    "compile_evolution",
    "complexity_bound",
    "default_scan_grid",
    "dense_simulate",
    "diagonalize",
    "electric_energy",
    "energy_gradient",
    "enumerate_basis",
    "expand_multicontrolled",
    "f_matrix",
    "fit_critical_law",
    "fix_qudits",
    "fmove_unitary",
    "g_gate",
    "gate_count",
    "hexagon_network",
    "hexagon_plaquette_circuit",
    "is_admissible",
    "lower_circuit",
    "mathieu_oracle",
    "mean_energy",
    "mean_plaquette",
    "optimize",
    "phase_scan",
    "plaquette_exponential_error",
    "plaquette_fmove_sequence",
    "plaquette_operator",
    "product_state_vector",
    "q_factorial",
    "q_number",
    "quantum_dimension",
    "racah_q6j",
    "single_plaquette_network",
    "step_exponential_error",
    "tadpole_conjugation_error",
    "torus_network",
    "torus_product_energy",
    "trotter_plaquette_step",
    "trotter_step_second_order",
    "verify_identities",
    "__version__",
]
