"""Deviation operators and lower bounds on the gate error probability.

The central objects are the deviation operators D_ij = U^dag Z_i U - Z_j on
control + target + ancilla and their root-mean-square values in the product
state |psi, 0, xi>.  Under an additive conservation law they obey commutation
identities that, combined with the Robertson uncertainty relation, yield a
closed-form lower bound on the achievable gate infidelity in terms of the
spread of the ancilla charge.

Conventions fixed here once:

* The control-qubit input maximizing the commutator witness |<[Z1, X1]>| = 2
  is the spin-y eigenstate (|0> + i|1>)/sqrt(2) (``plus_y_state``).  The
  squared-deviation closed forms are insensitive to the equatorial phase, so
  they may be cross-checked at (|0> + |1>)/sqrt(2) (``plus_x_state``) as well.
* The target qubit always enters in |0>.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import (
    GateTarget,
    Implementation,
    KrausVectorTable,
    SearchConfig,
    gate_fidelity,
    induced_operation,
    operation_of_unitary,
)
from .operators import (
    OperatorMatrix,
    StateVector,
    commutator,
    expectation,
    max_abs,
    pauli_embed,
    std_dev,
)
from .symmetry import ConservedQuantity, conservation_defect, total_charge

__all__ = [
    "plus_x_state",
    "plus_y_state",
    "witness_input",
    "DeviationAnalysis",
    "NoiseCommutationResiduals",
    "ImperfectionBound",
    "ClosedFormDeltas",
    "BoundReport",
    "BosonicDeltaL3",
    "deviation_operators",
    "deviation_analysis",
    "rms_deviation",
    "noise_commutation_residuals",
    "imperfection_lower_bound",
    "delta_squared_closed_form",
    "fundamental_bound",
    "qubit_size_bound",
    "bosonic_bound",
    "bosonic_size",
    "chain_bound",
    "bosonic_deltaL3",
]

CONSERVATION_TOL = 1e-8
INEQ_SLACK = 1e-9


def plus_x_state() -> StateVector:
    """(|0> + |1>)/sqrt(2): the +1 eigenstate of Pauli X."""
    return StateVector(np.array([1.0, 1.0]) / math.sqrt(2.0))


def plus_y_state() -> StateVector:
    """(|0> + i|1>)/sqrt(2): the +1 eigenstate of Pauli Y.

    This is the control input at which |<[Z1, X1]>| = |<2i Y1>| reaches 2,
    the value entering the fundamental bound.
    """
    return StateVector(np.array([1.0, 1.0j]) / math.sqrt(2.0))


def witness_input(psi: StateVector, impl: Implementation) -> StateVector:
    """|psi, 0, xi>: control in psi, target in |0>, ancilla in xi."""
    if psi.dim != 2:
        raise ValueError("control input must be a single-qubit state")
    ket0 = np.array([1.0, 0.0], dtype=complex)
    full = np.kron(np.kron(psi.amplitudes, ket0), impl.xi.amplitudes)
    return StateVector(full, impl.layout)


def _z_site(impl: Implementation, i: int) -> OperatorMatrix:
    # i = 1 is the control site, i = 2 the target site
    return pauli_embed("Z", impl.layout.labels[i - 1], impl.layout)


def _heisenberg(impl: Implementation, op: np.ndarray) -> np.ndarray:
    u = impl.U.matrix
    return u.conj().T @ op @ u


@dataclass(frozen=True)
class DeviationAnalysis:
    """Deviation operators D_ij = U^dag Z_i U - Z_j, with optional RMS values."""

    D: dict
    delta: dict | None = None
    input_psi: StateVector | None = None


def deviation_operators(impl: Implementation) -> DeviationAnalysis:
    """All four deviation operators on the full space (no state attached)."""
    ops = {}
    for i in (1, 2):
        primed = _heisenberg(impl, _z_site(impl, i).matrix)
        for j in (1, 2):
            ops[(i, j)] = OperatorMatrix(primed - _z_site(impl, j).matrix, impl.layout)
    return DeviationAnalysis(D=ops)


def rms_deviation(impl: Implementation, psi: StateVector, i: int, j: int) -> float:
    """delta_ij(psi) = <D_ij^2>^(1/2) in the state |psi, 0, xi>."""
    if i not in (1, 2) or j not in (1, 2):
        raise ValueError("deviation indices must be 1 or 2")
    state = witness_input(psi, impl)
    primed = _heisenberg(impl, _z_site(impl, i).matrix)
    d = primed - _z_site(impl, j).matrix
    v = d @ state.amplitudes
    return math.sqrt(max(float(np.vdot(v, v).real), 0.0))


def deviation_analysis(impl: Implementation, psi: StateVector) -> DeviationAnalysis:
    """Deviation operators together with their RMS values at ``psi``."""
    base = deviation_operators(impl)
    deltas = {(i, j): rms_deviation(impl, psi, i, j) for i in (1, 2) for j in (1, 2)}
    return DeviationAnalysis(D=base.D, delta=deltas, input_psi=psi)


@dataclass(frozen=True)
class NoiseCommutationResiduals:
    """Residual norms of the two noise commutation identities.

    Both identities express [Z1, L1] through commutators of evolved charges
    with deviation operators; they are exact operator equations whenever the
    conservation law holds, so ``conserved`` is False when the residuals are
    not expected to vanish.
    """

    r1: float
    r2: float
    conserved: bool


def noise_commutation_residuals(impl: Implementation,
                                cq: ConservedQuantity) -> NoiseCommutationResiduals:
    """Max-abs residuals of [Z1,L1] = [L1',D21] + [L2',D11] + [L3',D11 or D21].

    The identities are state independent, so no input state is involved;
    residuals are returned with ``conserved`` False (instead of raising) when
    the implementation violates the conservation law.
    """
    if cq.layout != impl.layout:
        raise ValueError("conserved quantity layout does not match the implementation")
    labels = impl.layout.labels
    z1 = _z_site(impl, 1).matrix
    dev = deviation_operators(impl).D
    d11 = dev[(1, 1)].matrix
    d21 = dev[(2, 1)].matrix
    l1p = _heisenberg(impl, cq.embedded(labels[0]).matrix)
    l2p = _heisenberg(impl, cq.embedded(labels[1]).matrix)
    lhs = commutator(z1, cq.embedded(labels[0]).matrix)
    common = commutator(l1p, d21) + commutator(l2p, d11)
    if len(labels) > 2:
        l3p = _heisenberg(impl, cq.embedded(labels[2]).matrix)
        r1 = max_abs(lhs - common - commutator(l3p, d11))
        r2 = max_abs(lhs - common - commutator(l3p, d21))
    else:
        r1 = r2 = max_abs(lhs - common)
    defect = conservation_defect(impl.U, total_charge(cq))
    return NoiseCommutationResiduals(r1=r1, r2=r2, conserved=defect <= CONSERVATION_TOL)


@dataclass(frozen=True)
class ImperfectionBound:
    """Uncertainty-relation lower bound on delta_11^2 + delta_21^2 at one input."""

    lhs: float
    rhs: float
    holds: bool
    commutator_abs: float
    delta_l3_prime: float


def imperfection_lower_bound(impl: Implementation, cq: ConservedQuantity,
                             psi: StateVector) -> ImperfectionBound:
    """|<[Z1,L1]>|^2 / (2 (2||L1|| + dL3')^2) <= delta_11^2 + delta_21^2.

    All expectations are taken in |psi, 0, xi>.  Requires the conservation
    law to hold; the derivation is invalid otherwise.
    """
    if cq.layout != impl.layout:
        raise ValueError("conserved quantity layout does not match the implementation")
    defect = conservation_defect(impl.U, total_charge(cq))
    if defect > CONSERVATION_TOL:
        raise ValueError(
            f"conservation defect {defect:.3e} exceeds {CONSERVATION_TOL}; bound does not apply")
    state = witness_input(psi, impl)
    labels = impl.layout.labels
    z1 = _z_site(impl, 1).matrix
    l1 = cq.embedded(labels[0]).matrix
    num = abs(expectation(OperatorMatrix(commutator(z1, l1), impl.layout), state))
    if len(labels) > 2:
        l3p = OperatorMatrix(_heisenberg(impl, cq.embedded(labels[2]).matrix), impl.layout)
        dl3 = std_dev(l3p, state)
    else:
        dl3 = 0.0
    norm1 = cq.computational_norm
    lhs = num * num / (2.0 * (2.0 * norm1 + dl3) ** 2)
    rhs = rms_deviation(impl, psi, 1, 1) ** 2 + rms_deviation(impl, psi, 2, 1) ** 2
    return ImperfectionBound(lhs=lhs, rhs=rhs, holds=lhs <= rhs + INEQ_SLACK,
                             commutator_abs=num, delta_l3_prime=dl3)


@dataclass(frozen=True)
class ClosedFormDeltas:
    d11_sq: float
    d21_sq: float


def delta_squared_closed_form(table: KrausVectorTable) -> ClosedFormDeltas:
    """delta_11^2 and delta_21^2 from Kraus vector norms, equatorial control input.

    Valid whenever the control enters in any equal-weight superposition
    (|0> + e^{i phi} |1>)/sqrt(2) and the target in |0>; the cross terms that
    would carry the phase cancel in the real part.
    """
    n = table.norm_sq
    d11 = 2.0 * (n(1, 0, 0, 0) + n(1, 0, 0, 1) + n(0, 0, 1, 0) + n(0, 0, 1, 1))
    d21 = 2.0 * (n(1, 0, 0, 0) + n(0, 0, 0, 1) + n(1, 0, 1, 0) + n(0, 0, 1, 1))
    return ClosedFormDeltas(d11_sq=d11, d21_sq=d21)


@dataclass(frozen=True)
class BoundReport:
    """A lower bound on 1 - F^2 next to the measured value it constrains."""

    kind: str
    lower_bound: float
    measured_infidelity: float
    measured_cb_lower: float
    delta_L3_prime: float
    size: float
    satisfied: bool
    margin: float


def _require_x_type(cq: ConservedQuantity):
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    for label in cq.layout.labels[:2]:
        m = cq.local(label).matrix
        if min(max_abs(m - x), max_abs(m + x)) > 1e-10:
            raise ValueError(
                "fundamental bound requires x-type computational charges "
                "(L1 = L2 = Pauli X, operator norm 1)")


def fundamental_bound(impl: Implementation, cq: ConservedQuantity,
                      search: SearchConfig | None = None,
                      gate_fidelity_value: float | None = None) -> BoundReport:
    """1 / (4 (2 + dL3')^2) <= 1 - F^2, with dL3' measured on the implementation.

    The spread dL3' of the evolved ancilla charge is evaluated in the witness
    state |psi_y, 0, xi> with psi_y the spin-y control input, where the
    commutator witness equals 2 and the derivation is tight.  Requires x-type
    computational charges and an exactly conserving U.
    """
    _require_x_type(cq)
    defect = conservation_defect(impl.U, total_charge(cq))
    if defect > CONSERVATION_TOL:
        raise ValueError(
            f"conservation defect {defect:.3e} exceeds {CONSERVATION_TOL}; bound does not apply")
    state = witness_input(plus_y_state(), impl)
    if len(impl.layout.labels) > 2:
        l3p = OperatorMatrix(_heisenberg(impl, cq.embedded(impl.layout.labels[2]).matrix),
                             impl.layout)
        dl3 = std_dev(l3p, state)
    else:
        dl3 = 0.0
    lower = 1.0 / (4.0 * (2.0 + dl3) ** 2)

    if gate_fidelity_value is None:
        gate_fidelity_value = gate_fidelity(impl, GateTarget.cnot(), search).value
    infid = max(0.0, 1.0 - gate_fidelity_value ** 2)

    choi_e = induced_operation(impl).choi
    choi_v = operation_of_unitary(GateTarget.cnot().matrix).choi
    diff = (choi_e - choi_v) / 4.0
    probe = float(np.sum(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2))) / 2)
    cb_lower = max(infid, probe)

    return BoundReport(kind="fundamental", lower_bound=lower,
                       measured_infidelity=infid, measured_cb_lower=cb_lower,
                       delta_L3_prime=dl3, size=2.0 + dl3,
                       satisfied=lower <= infid + INEQ_SLACK,
                       margin=infid - lower)


def qubit_size_bound(n: int) -> float:
    """1 / (4 n^2): the error floor for an implementation of n qubits total."""
    if int(n) != n or n < 2:
        raise ValueError(f"total qubit count must be an integer >= 2, got {n}")
    return 1.0 / (4.0 * float(n) ** 2)


def bosonic_bound(mean_photons: float) -> float:
    """1 / (16 <N>): the error floor for a coherent ancilla of mean photon number <N>."""
    if not mean_photons > 0:
        raise ValueError(f"mean photon number must be positive, got {mean_photons}")
    return 1.0 / (16.0 * float(mean_photons))


def bosonic_size(mean_photons: float) -> float:
    """Implementation size 2 sqrt(<N>) assigned to a coherent ancilla."""
    if not mean_photons > 0:
        raise ValueError(f"mean photon number must be positive, got {mean_photons}")
    return 2.0 * math.sqrt(float(mean_photons))


def chain_bound(m: int, s: float) -> float:
    """1 / (4 m^3 s^2): error floor for one gate in an m-gate chain of size-s gates."""
    if int(m) != m or m < 1:
        raise ValueError(f"gate count must be an integer >= 1, got {m}")
    if not s >= 2:
        raise ValueError(f"size must be >= 2, got {s}")
    return 1.0 / (4.0 * float(m) ** 3 * float(s) ** 2)


@dataclass(frozen=True)
class BosonicDeltaL3:
    measured: float
    cap: float
    mean_photons: float
    tail_mass: float


def bosonic_deltaL3(impl: Implementation, cq: ConservedQuantity,
                    slack: float = 1e-6) -> BosonicDeltaL3:
    """Measured spread of the evolved photon charge against its coherent cap.

    For a coherent ancilla and L3 = 2N the conservation law keeps the evolved
    spread below 2 (<N> + 2)^(1/2) up to truncation effects; the measured
    value is required to respect that cap within ``slack``.
    """
    if len(impl.layout.labels) < 3:
        raise ValueError("bosonic cap needs an ancilla subsystem")
    label_a = impl.layout.labels[2]
    l3 = cq.local(label_a).matrix
    trunc = impl.ancilla_dim
    if max_abs(l3 - np.diag(2.0 * np.arange(trunc))) > 1e-10:
        raise ValueError("ancilla charge must be twice the number operator")
    amps = impl.xi.amplitudes
    weights = np.abs(amps) ** 2
    mean_n = float(weights @ np.arange(trunc))
    var_n = float(weights @ (np.arange(trunc) ** 2)) - mean_n ** 2
    tail = float(np.sum(weights[-2:]))
    if tail > 1e-8:
        warnings.warn(f"coherent tail mass {tail:.3g} exceeds 1e-8; "
                      "truncation may bias the cap check", stacklevel=2)
    elif abs(var_n - mean_n) > 1e-6 * (1.0 + mean_n):
        # with a negligible tail, broken Poisson statistics mean a non-coherent state
        raise ValueError("ancilla state is not coherent within truncation tolerance "
                         f"(var {var_n:.6g} vs mean {mean_n:.6g})")
    state = witness_input(plus_y_state(), impl)
    l3p = OperatorMatrix(_heisenberg(impl, cq.embedded(label_a).matrix), impl.layout)
    measured = std_dev(l3p, state)
    cap = 2.0 * math.sqrt(mean_n + 2.0)
    if measured > cap + slack + tail:
        raise ValueError(f"measured ancilla-charge spread {measured:.6g} "
                         f"exceeds the coherent cap {cap:.6g}")
    return BosonicDeltaL3(measured=measured, cap=cap, mean_photons=mean_n, tail_mass=tail)
