"""Conservation-law limits on quantum gate implementations.

A library and CLI for constructing controlled-NOT implementations constrained
by an additive conservation law, measuring their deviation from the ideal
gate, and checking the closed-form lower bounds on the achievable gate error
probability as a function of implementation size.
"""

from .operators import (
    ATOL_ALGEBRA,
    ATOL_CP,
    ATOL_UNITARY,
    DensityOperator,
    LayoutError,
    OperatorMatrix,
    StateVector,
    SystemLayout,
    coherent_state,
    coherent_truncation,
    commutator,
    expectation,
    hermitian_exp,
    max_abs,
    number_operator,
    partial_trace,
    pauli_embed,
    sigma,
    std_dev,
    tensor,
    trace_distance,
)
from .symmetry import (
    CommutantBasis,
    ConservedQuantity,
    cnot_matrix,
    commutant_basis,
    conservation_defect,
    hermitian_from_coeffs,
    invariant_unitary,
    nogo_offdiagonal_witness,
    project_to_basis,
    swap_matrix,
    total_charge,
    x_sum_charge,
)
from .channel import (
    CbBounds,
    GateFidelityResult,
    GateTarget,
    Implementation,
    KrausVectorTable,
    QuantumOperation,
    SearchConfig,
    basis_fidelity,
    cb_lower_bounds,
    gate_fidelity,
    induced_operation,
    kraus_vectors,
    minimize_state_fidelity,
    operation_of_unitary,
    state_fidelity,
)
from .bounds import (
    BoundReport,
    BosonicDeltaL3,
    ClosedFormDeltas,
    DeviationAnalysis,
    ImperfectionBound,
    NoiseCommutationResiduals,
    bosonic_bound,
    bosonic_deltaL3,
    bosonic_size,
    chain_bound,
    delta_squared_closed_form,
    deviation_analysis,
    deviation_operators,
    fundamental_bound,
    imperfection_lower_bound,
    noise_commutation_residuals,
    plus_x_state,
    plus_y_state,
    qubit_size_bound,
    rms_deviation,
    witness_input,
)
from .optimize import (
    BosonicRow,
    FockAncilla,
    OptimizationProblem,
    OptimizationResult,
    QubitAncilla,
    SweepRow,
    SweepSpec,
    bosonic_sweep,
    optimize_implementation,
    problem_space,
    sweep_sizes,
)
from .report import CheckRecord, Report, render_float, render_report, render_table
from .verify import run_identity_suite

__version__ = "0.1.0"
