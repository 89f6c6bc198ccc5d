"""Seeded identity suite: every closed-form relation the library rests on.

Each check produces one record.  Residual-style checks pass when the measured
residual is at most the tolerance; value-style checks pass when the measured
value matches the expected one within tolerance.  A single tolerance override
replaces the per-check defaults (useful for forcing a failing run).
"""

from __future__ import annotations

import math

import numpy as np

from .bounds import (
    delta_squared_closed_form,
    imperfection_lower_bound,
    noise_commutation_residuals,
    plus_x_state,
    plus_y_state,
    rms_deviation,
)
from .channel import GateTarget, Implementation, SearchConfig, induced_operation, \
    gate_fidelity, kraus_vectors
from .operators import (
    OperatorMatrix,
    StateVector,
    SystemLayout,
    expectation,
    hermitian_exp,
    max_abs,
    pauli_embed,
    sigma,
    std_dev,
)
from .optimize import OptimizationProblem, QubitAncilla, problem_space
from .report import CheckRecord, Report
from .symmetry import (
    ConservedQuantity,
    cnot_matrix,
    commutant_basis,
    conservation_defect,
    invariant_unitary,
    nogo_offdiagonal_witness,
    swap_matrix,
)

__all__ = ["run_identity_suite"]


def _residual(name, measured, tol):
    return CheckRecord(name=name, expected=None, measured=float(measured),
                       tolerance=float(tol), passed=float(measured) <= float(tol))


def _value(name, measured, expected, tol):
    return CheckRecord(name=name, expected=float(expected), measured=float(measured),
                       tolerance=float(tol),
                       passed=abs(float(measured) - float(expected)) <= float(tol))


def _two_qubit_layout() -> SystemLayout:
    return SystemLayout((2, 2), ("C", "T"))


def _random_invariant_batch(seed, count, search):
    """Invariant implementations with x-type charges, ancilla of 0..2 qubits."""
    batch = []
    for t in range(count):
        rng = np.random.default_rng((seed, 4242, t))
        k = int(rng.integers(0, 3))
        space = problem_space(OptimizationProblem(QubitAncilla(k)))
        theta = rng.normal(size=space.basis.size)
        u = invariant_unitary(theta, space.basis)
        if k == 0:
            xi = StateVector([1.0])
        else:
            amp = rng.normal(size=2 ** k) + 1j * rng.normal(size=2 ** k)
            xi = StateVector(amp / np.linalg.norm(amp))
        batch.append((Implementation(u, xi, space.layout), space.charge_quantity))
    return batch


def run_identity_suite(seed: int = 0, tolerance: float | None = None) -> Report:
    """All structural identities, as a report with one record per check."""
    def tol(default):
        return default if tolerance is None else tolerance

    records = []
    layout2 = _two_qubit_layout()
    x1 = pauli_embed("X", "C", layout2)
    x2 = pauli_embed("X", "T", layout2)
    y1 = pauli_embed("Y", "C", layout2)
    z1 = pauli_embed("Z", "C", layout2)
    charge2 = OperatorMatrix(x1.matrix + x2.matrix, layout2)

    # exact SWAP from the exchange generator
    gen = OperatorMatrix(
        -np.eye(4, dtype=complex) + x1.matrix @ x2.matrix
        + y1.matrix @ pauli_embed("Y", "T", layout2).matrix
        + z1.matrix @ pauli_embed("Z", "T", layout2).matrix, layout2)
    u_swap = hermitian_exp(gen, -math.pi / 4.0)
    records.append(_residual("swap_construction_error",
                             max_abs(u_swap.matrix - swap_matrix()), tol(1e-10)))
    records.append(_residual("swap_conservation_defect",
                             conservation_defect(u_swap, charge2), tol(1e-12)))

    # single-site Pauli algebra at the embed sites
    algebra = 0.0
    for a, b, c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
        pa = pauli_embed(a, "C", layout2).matrix
        pb = pauli_embed(b, "C", layout2).matrix
        pc = pauli_embed(c, "C", layout2).matrix
        algebra = max(algebra, max_abs(pa @ pa - np.eye(4)),
                      max_abs(pa @ pb - 1j * pc))
    records.append(_residual("pauli_algebra_residual", algebra, tol(1e-12)))
    records.append(_residual("commutator_zx_equals_2iy",
                             max_abs(z1.matrix @ x1.matrix - x1.matrix @ z1.matrix
                                     - 2j * y1.matrix), tol(1e-12)))

    # commutator witness at the spin-y input
    wit = StateVector(np.kron(plus_y_state().amplitudes,
                              np.array([1.0, 0.0], dtype=complex)), layout2)
    comm = OperatorMatrix(z1.matrix @ x1.matrix - x1.matrix @ z1.matrix, layout2)
    records.append(_value("commutator_witness_spin_y",
                          abs(expectation(comm, wit)), 2.0, tol(1e-12)))

    # diagonality obstruction for the controlled-NOT
    for kind, want in (("X", 1.0), ("Y", 1.0), ("Z", 0.0)):
        p = OperatorMatrix(sigma(kind))
        records.append(_value(f"nogo_witness_{kind.lower()}",
                              nogo_offdiagonal_witness(p, p), want, tol(1e-12)))
    records.append(_value("cnot_conservation_defect",
                          conservation_defect(OperatorMatrix(cnot_matrix(), layout2),
                                              charge2), 1.0, tol(1e-12)))
    records.append(_value("commutant_dimension_two_qubits",
                          commutant_basis(charge2).size, 6.0, tol(0.0)))

    # noise commutation identities on a seeded invariant batch
    search = SearchConfig(starts=8, max_iter=300, seed=seed)
    batch = _random_invariant_batch(seed, 8, search)
    worst_nc = 0.0
    for impl, cq in batch:
        res = noise_commutation_residuals(impl, cq)
        worst_nc = max(worst_nc, res.r1, res.r2)
    records.append(_residual("noise_commutation_invariant", worst_nc, tol(1e-8)))

    xi2 = StateVector(np.eye(2, dtype=complex)[0])
    cnot_impl = Implementation.embed(cnot_matrix(), xi2)
    cq3 = ConservedQuantity({"C": sigma("X"), "T": sigma("X"), "A": sigma("X")},
                            cnot_impl.layout)
    violated = noise_commutation_residuals(cnot_impl, cq3)
    records.append(_value("noise_commutation_cnot_violation",
                          violated.r1, 2.0, tol(1e-9)))

    # Robertson uncertainty relation on random pairs
    rng = np.random.default_rng((seed, 777))
    worst_rob = 0.0
    for _ in range(12):
        d = int(rng.integers(2, 6))
        m1 = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        m2 = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        a = OperatorMatrix((m1 + m1.conj().T) / 2)
        b = OperatorMatrix((m2 + m2.conj().T) / 2)
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        psi = StateVector(v / np.linalg.norm(v))
        lhs = abs(expectation(OperatorMatrix(a.matrix @ b.matrix - b.matrix @ a.matrix), psi))
        rhs = 2.0 * std_dev(a, psi) * std_dev(b, psi)
        worst_rob = max(worst_rob, lhs - rhs)
    records.append(_residual("robertson_uncertainty_excess",
                             max(0.0, worst_rob), tol(1e-9)))

    # inequality chain and closed forms on the same invariant batch
    target = GateTarget.cnot()
    worst26 = 0.0
    worst22 = 0.0
    worst_cf = 0.0
    psi_x = plus_x_state()
    psi_y = plus_y_state()
    for impl, cq in batch:
        table = kraus_vectors(impl)
        cf = delta_squared_closed_form(table)
        d11 = rms_deviation(impl, psi_x, 1, 1)
        d21 = rms_deviation(impl, psi_x, 2, 1)
        worst_cf = max(worst_cf, abs(cf.d11_sq - d11 ** 2), abs(cf.d21_sq - d21 ** 2))
        f = gate_fidelity(impl, target, search).value
        worst26 = max(worst26, cf.d11_sq + cf.d21_sq - 8.0 * (1.0 - f * f))
        imp = imperfection_lower_bound(impl, cq, psi_y)
        worst22 = max(worst22, imp.lhs - imp.rhs)
    records.append(_residual("closed_form_delta_consistency", worst_cf, tol(1e-9)))
    records.append(_residual("fidelity_chain_excess", max(0.0, worst26), tol(1e-8)))
    records.append(_residual("imperfection_bound_excess", max(0.0, worst22), tol(1e-8)))

    # operation structure: trace preservation and complete positivity
    worst_tp = 0.0
    worst_cp = 0.0
    for impl, _ in batch:
        op = induced_operation(impl)
        d = op.dim
        tp = np.einsum("aiaj->ij", op.choi.reshape(d, d, d, d))
        worst_tp = max(worst_tp, max_abs(tp - np.eye(d)))
        worst_cp = max(worst_cp, -float(np.min(np.linalg.eigvalsh(op.choi))))
    records.append(_residual("choi_trace_preservation", worst_tp, tol(1e-9)))
    records.append(_residual("choi_positivity_deficit", max(0.0, worst_cp), tol(1e-9)))

    return Report(command="verify", records=records)
