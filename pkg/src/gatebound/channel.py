"""Physical gate implementations and their distance from the ideal gate.

An implementation is a pair (U, |xi>): a unitary on control + target + ancilla
together with the ancilla state prepared when U is switched on.  Tracing out
the ancilla induces a trace-preserving operation on the two computational
qubits; everything measurable about the implementation (Kraus vectors, basis
and worst-case fidelities, trace-distance lower bounds on the worst-case gate
error) derives from that operation.

The completely bounded distance itself requires a supremum over entangled
references and is out of scope; this module reports only certified lower
bounds for it (one from the worst-case fidelity, one from the maximally
entangled probe).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .operators import (
    ATOL_ALGEBRA,
    ATOL_CP,
    ATOL_UNITARY,
    OperatorMatrix,
    StateVector,
    SystemLayout,
    max_abs,
)
from .simplex import nelder_mead
from .symmetry import cnot_matrix, swap_matrix

__all__ = [
    "Implementation",
    "QuantumOperation",
    "KrausVectorTable",
    "GateTarget",
    "SearchConfig",
    "GateFidelityResult",
    "CbBounds",
    "induced_operation",
    "kraus_vectors",
    "basis_fidelity",
    "state_fidelity",
    "gate_fidelity",
    "minimize_state_fidelity",
    "cb_lower_bounds",
]


@dataclass(frozen=True)
class GateTarget:
    """Ideal two-qubit gate with an optional exact computational-basis action."""

    name: str
    matrix: np.ndarray
    basis_action: Optional[dict] = None

    def __init__(self, name: str, matrix, basis_action: Optional[dict] = None):
        m = np.array(matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError(f"gate target must be 4x4, got {m.shape}")
        if max_abs(m.conj().T @ m - np.eye(4)) > ATOL_UNITARY:
            raise ValueError("gate target must be unitary")
        if basis_action is not None:
            for (a, b), (c, d) in basis_action.items():
                col = m[:, 2 * a + b]
                want = np.zeros(4, dtype=complex)
                want[2 * c + d] = 1.0
                if not np.array_equal(col, want):
                    raise ValueError(f"target action on |{a},{b}> is not exactly |{c},{d}>")
        m.setflags(write=False)
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "basis_action", basis_action)

    @classmethod
    def cnot(cls) -> "GateTarget":
        action = {(a, b): (a, b ^ a) for a in range(2) for b in range(2)}
        return cls("CNOT", cnot_matrix(), action)

    @classmethod
    def swap(cls) -> "GateTarget":
        action = {(a, b): (b, a) for a in range(2) for b in range(2)}
        return cls("SWAP", swap_matrix(), action)

    @classmethod
    def identity(cls) -> "GateTarget":
        action = {(a, b): (a, b) for a in range(2) for b in range(2)}
        return cls("I", np.eye(4, dtype=complex), action)

    def output_index(self, a: int, b: int) -> tuple:
        if self.basis_action is None:
            raise ValueError(f"target {self.name!r} has no exact basis action table")
        return self.basis_action[(a, b)]


@dataclass(frozen=True)
class Implementation:
    """A unitary U on C+T+A plus the prepared ancilla state |xi>."""

    U: OperatorMatrix
    xi: StateVector
    layout: SystemLayout

    def __init__(self, U: OperatorMatrix, xi: StateVector,
                 layout: SystemLayout | None = None):
        U.require_unitary(ATOL_UNITARY)
        if abs(xi.norm() - 1.0) > ATOL_ALGEBRA:
            raise ValueError("ancilla state must be normalized")
        if U.dim != 4 * xi.dim:
            raise ValueError(
                f"unitary dim {U.dim} != 4 * ancilla dim {xi.dim}")
        if layout is None:
            if xi.dim >= 2:
                layout = SystemLayout((2, 2, xi.dim), ("C", "T", "A"))
            else:
                layout = SystemLayout((2, 2), ("C", "T"))
        if layout.dim != U.dim:
            raise ValueError(f"layout dim {layout.dim} != unitary dim {U.dim}")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "layout", layout)

    @property
    def ancilla_dim(self) -> int:
        return self.xi.dim

    @classmethod
    def embed(cls, gate4, xi=None) -> "Implementation":
        """V on C+T tensored with identity on the ancilla carrying ``xi``."""
        g = gate4.matrix if isinstance(gate4, OperatorMatrix) else np.asarray(gate4, dtype=complex)
        if xi is None:
            xi = StateVector([1.0])
        elif not isinstance(xi, StateVector):
            xi = StateVector(xi)
        u = np.kron(g, np.eye(xi.dim, dtype=complex))
        return cls(OperatorMatrix(u), xi)

    @classmethod
    def ideal(cls, target: GateTarget) -> "Implementation":
        return cls.embed(target.matrix)

    def kraus_operators(self) -> np.ndarray:
        """Stacked Kraus operators K_m = (I (x) <m|) U (I (x) |xi>), shape (dA, 4, 4)."""
        da = self.ancilla_dim
        u = self.U.matrix.reshape(4, da, 4, da)
        return np.einsum("cmal,l->mca", u, self.xi.amplitudes)


@dataclass(frozen=True)
class QuantumOperation:
    """Completely positive trace-preserving map in Choi form plus Kraus list.

    Choi convention, fixed project-wide: Choi(E) = sum_ij E(|i><j|) (x) |i><j|
    with the output factor first (so the Choi matrix divided by the input
    dimension is the state (E (x) id) applied to the maximally entangled pair).
    """

    choi: np.ndarray
    kraus: np.ndarray

    def __init__(self, choi, kraus):
        c = np.array(choi, dtype=complex)
        k = np.array(kraus, dtype=complex)
        d = k.shape[-1]
        if c.shape != (d * d, d * d):
            raise ValueError(f"Choi matrix shape {c.shape} inconsistent with Kraus dim {d}")
        if float(np.min(np.linalg.eigvalsh((c + c.conj().T) / 2))) < -ATOL_CP:
            raise ValueError("operation is not completely positive within 1e-9")
        tp = np.einsum("aiaj->ij", c.reshape(d, d, d, d))
        if max_abs(tp - np.eye(d)) > ATOL_CP:
            raise ValueError("operation is not trace-preserving within 1e-9")
        c.setflags(write=False)
        k.setflags(write=False)
        object.__setattr__(self, "choi", c)
        object.__setattr__(self, "kraus", k)

    @property
    def dim(self) -> int:
        return self.kraus.shape[-1]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """E(rho) = sum_m K_m rho K_m^dag."""
        rho = np.asarray(rho, dtype=complex)
        return np.einsum("mab,bc,mdc->ad", self.kraus, rho, self.kraus.conj())


def induced_operation(impl: Implementation) -> QuantumOperation:
    """The trace-preserving operation rho -> Tr_A[U (rho (x) |xi><xi|) U^dag]."""
    kraus = impl.kraus_operators()
    vecs = kraus.reshape(kraus.shape[0], -1)
    choi = vecs.T @ vecs.conj()
    return QuantumOperation(choi, kraus)


def operation_of_unitary(gate4) -> QuantumOperation:
    """ad V: the operation of an ideal two-qubit unitary."""
    g = gate4.matrix if isinstance(gate4, OperatorMatrix) else np.asarray(gate4, dtype=complex)
    return QuantumOperation(np.outer(g.reshape(-1), g.reshape(-1).conj()), g[None, :, :])


@dataclass(frozen=True)
class KrausVectorTable:
    """Ancilla vectors |E^{ab}_{cd}> from expanding U |a,b>|xi> over C+T.

    The vectors are not individually normalized; for each input pair (a, b)
    their squared norms sum to one.
    """

    entries: dict

    def __init__(self, entries: dict):
        for a in range(2):
            for b in range(2):
                tot = sum(float(np.vdot(entries[(a, b, c, d)], entries[(a, b, c, d)]).real)
                          for c in range(2) for d in range(2))
                if abs(tot - 1.0) > ATOL_UNITARY:
                    raise ValueError(
                        f"Kraus vector norms for input ({a},{b}) sum to {tot}, expected 1")
        object.__setattr__(self, "entries", dict(entries))

    def vector(self, a: int, b: int, c: int, d: int) -> np.ndarray:
        return self.entries[(a, b, c, d)]

    def norm_sq(self, a: int, b: int, c: int, d: int) -> float:
        v = self.entries[(a, b, c, d)]
        return float(np.vdot(v, v).real)


def kraus_vectors(impl: Implementation) -> KrausVectorTable:
    """|E^{ab}_{cd}> = (<c,d| (x) I_A) U |a,b>|xi>."""
    da = impl.ancilla_dim
    u = impl.U.matrix.reshape(2, 2, da, 2, 2, da)
    out = np.einsum("cdkabl,l->abcdk", u, impl.xi.amplitudes)
    return KrausVectorTable({(a, b, c, d): out[a, b, c, d]
                             for a in range(2) for b in range(2)
                             for c in range(2) for d in range(2)})


def basis_fidelity(table: KrausVectorTable, a: int, b: int,
                   target: GateTarget | None = None) -> float:
    """Norm of the Kraus vector matched to the target output for input |a,b>.

    Defaults to the controlled-NOT matching (c, d) = (a, b xor a).
    """
    c, d = (a, b ^ a) if target is None else target.output_index(a, b)
    return math.sqrt(table.norm_sq(a, b, c, d))


def state_fidelity(impl: Implementation, target: GateTarget, psi: StateVector) -> float:
    """F(psi) = <psi| V^dag E(|psi><psi|) V |psi> ^ (1/2)."""
    if psi.dim != 4:
        raise ValueError("input state must live on the two computational qubits")
    kraus = impl.kraus_operators()
    out = target.matrix @ psi.amplitudes
    z = np.einsum("mca,a,c->m", kraus, psi.amplitudes, out.conj())
    return math.sqrt(max(float(np.sum(np.abs(z) ** 2)), 0.0))


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for the derivative-free searches.

    ``starts`` is the multistart count for state-space minimization (>= 8);
    ``restarts`` the number of implementation-space restarts (>= 4).
    """

    starts: int = 16
    restarts: int = 8
    max_iter: int = 600
    diam_tol: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if self.starts < 8:
            raise ValueError("need at least 8 multistart states")
        if self.restarts < 4:
            raise ValueError("need at least 4 restarts")
        if self.max_iter < 200:
            raise ValueError("need at least 200 iterations")
        if self.diam_tol <= 0:
            raise ValueError("diam_tol must be positive")


@dataclass(frozen=True)
class GateFidelityResult:
    value: float
    argmin: StateVector
    converged: bool


# Canonical state-space starts: the four computational basis states plus four
# superpositions (equatorial control, equatorial target, both equatorial with
# a quarter phase, maximally entangled pair).
def _fixed_state_starts() -> list:
    starts = [np.eye(8)[k] for k in range(4)]
    s = 1.0 / math.sqrt(2.0)
    starts.append(np.array([s, 0, s, 0, 0, 0, 0, 0]))      # (|0>+|1>)/sqrt2 (x) |0>
    starts.append(np.array([s, s, 0, 0, 0, 0, 0, 0]))      # |0> (x) (|0>+|1>)/sqrt2
    starts.append(np.array([s, 0, 0, 0, 0, 0, s, 0]))      # (|0>+i|1>)/sqrt2 (x) |0>
    starts.append(np.array([s, 0, 0, s, 0, 0, 0, 0]))      # (|00>+|11>)/sqrt2
    return starts


def _gauge_fixed(c: np.ndarray) -> np.ndarray:
    c = c / np.linalg.norm(c)
    for ck in c:
        if abs(ck) > 1e-8:
            c = c * (ck.conj() / abs(ck))
            break
    return c


def minimize_state_fidelity(kraus: np.ndarray, target_matrix: np.ndarray,
                            starts: int = 16, seed: int = 0, max_iter: int = 600,
                            diam_tol: float = 1e-9, extra_starts=None):
    """Multistart simplex minimization of F(psi) over pure two-qubit inputs.

    States are parameterized by 8 reals, normalized inside the objective with
    the global phase fixed afterwards (the fidelity is phase invariant, so the
    gauge choice only removes a flat direction).  Returns (value, state,
    converged); the value never exceeds the best start, so including the four
    computational basis states makes F <= min_ab F(a, b) structural.
    """
    a_flat = np.einsum("ba,mbc->mac", target_matrix.conj(), kraus).reshape(-1, 4)

    def objective(v):
        c = v[:4] + 1j * v[4:]
        n2 = float((c @ c.conj()).real)
        if n2 < 1e-24:
            return 2.0
        amps = (a_flat @ c).reshape(-1, 4) @ c.conj()
        return math.sqrt(max(float((amps @ amps.conj()).real), 0.0)) / n2

    start_vecs = _fixed_state_starts()
    if extra_starts is not None:
        for s in extra_starts:
            s = np.asarray(s, dtype=complex).reshape(-1)
            start_vecs.append(np.concatenate([s.real, s.imag]))
    rng = np.random.default_rng((seed, 0x5AFE))
    while len(start_vecs) < max(starts, 8) + (0 if extra_starts is None else len(extra_starts)):
        v = rng.normal(size=8)
        start_vecs.append(v / np.linalg.norm(v))

    best_val = math.inf
    best_x = start_vecs[0]
    best_converged = False
    for v0 in start_vecs:
        res = nelder_mead(objective, v0, step=0.25, max_iter=max_iter, diam_tol=diam_tol)
        if res.fun < best_val:
            best_val, best_x, best_converged = res.fun, res.x, res.converged
    c = _gauge_fixed(best_x[:4] + 1j * best_x[4:])
    return min(max(best_val, 0.0), 1.0), c, best_converged


def gate_fidelity(impl: Implementation, target: GateTarget,
                  search: SearchConfig | None = None) -> GateFidelityResult:
    """Worst-case fidelity min_psi F(psi) over pure two-qubit inputs."""
    cfg = search or SearchConfig()
    value, c, converged = minimize_state_fidelity(
        impl.kraus_operators(), target.matrix,
        starts=cfg.starts, seed=cfg.seed, max_iter=cfg.max_iter, diam_tol=cfg.diam_tol)
    return GateFidelityResult(value, StateVector(c), converged)


@dataclass(frozen=True)
class CbBounds:
    """Certified lower bounds on the completely bounded distance."""

    fidelity_bound: float
    choi_probe_bound: float

    @property
    def best(self) -> float:
        return max(self.fidelity_bound, self.choi_probe_bound)


def cb_lower_bounds(impl: Implementation, target: GateTarget,
                    search: SearchConfig | None = None) -> CbBounds:
    """Two lower bounds on the worst-case gate error probability.

    ``fidelity_bound`` is 1 - F^2 with F the worst-case fidelity;
    ``choi_probe_bound`` is the trace distance between the outputs of
    (E (x) id) and (ad V (x) id) on the maximally entangled probe, i.e. a
    quarter of the Choi difference in trace norm halved.
    """
    f = gate_fidelity(impl, target, search).value
    choi_e = induced_operation(impl).choi
    choi_v = operation_of_unitary(target.matrix).choi
    diff = (choi_e - choi_v) / 4.0
    eig = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
    probe = float(np.sum(np.abs(eig)) / 2)
    return CbBounds(fidelity_bound=max(0.0, 1.0 - f * f),
                    choi_probe_bound=min(max(probe, 0.0), 1.0))
