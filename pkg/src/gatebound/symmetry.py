"""Additive conserved quantities and the unitaries that respect them.

A conserved quantity is a sum of local hermitian charges, one per subsystem.
The set of unitaries commuting with the total charge is ``exp(i H)`` for
hermitian ``H`` in the charge's commutant, which decomposes into full matrix
blocks over the charge eigenspaces.  ``commutant_basis`` builds a
trace-orthonormal hermitian basis of that commutant; ``invariant_unitary``
exponentiates coefficient vectors against it block by block, so conservation
holds by construction rather than by penalty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .operators import (
    ATOL_ALGEBRA,
    ATOL_UNITARY,
    OperatorMatrix,
    SystemLayout,
    commutator,
    max_abs,
)

__all__ = [
    "ConservedQuantity",
    "CommutantBasis",
    "cnot_matrix",
    "swap_matrix",
    "x_sum_charge",
    "total_charge",
    "commutant_basis",
    "invariant_unitary",
    "conservation_defect",
    "nogo_offdiagonal_witness",
    "hermitian_from_coeffs",
    "project_to_basis",
]

CLUSTER_TOL = 1e-8  # eigenvalues closer than this are one eigenspace


def cnot_matrix() -> np.ndarray:
    """Controlled-NOT on two qubits: |a,b> -> |a, b xor a>, exact integers."""
    m = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for b in range(2):
            m[2 * a + (b ^ a), 2 * a + b] = 1.0
    return m


def swap_matrix() -> np.ndarray:
    """SWAP on two qubits: |a,b> -> |b,a>, exact integers."""
    m = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for b in range(2):
            m[2 * b + a, 2 * a + b] = 1.0
    return m


def x_sum_charge(n_qubits: int) -> np.ndarray:
    """Sum of single-qubit Pauli-X over ``n_qubits`` qubits (0 qubits -> 1x1 zero)."""
    if n_qubits == 0:
        return np.zeros((1, 1), dtype=complex)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    total = np.zeros((2 ** n_qubits,) * 2, dtype=complex)
    for j in range(n_qubits):
        op = np.array([[1.0 + 0j]])
        for i in range(n_qubits):
            op = np.kron(op, x if i == j else np.eye(2, dtype=complex))
        total += op
    return total


def _operator_norm(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh((m + m.conj().T) / 2))))


@dataclass(frozen=True)
class ConservedQuantity:
    """Local hermitian charges, one per subsystem of ``layout``.

    The first two subsystems are the computational pair; their charges must
    have equal operator norm (the two computational qubits share a physical
    structure, so their charge scales match).
    """

    per_subsystem: dict
    layout: SystemLayout

    def __init__(self, per_subsystem: dict, layout: SystemLayout):
        if set(per_subsystem) != set(layout.labels):
            raise ValueError(
                f"charges {sorted(per_subsystem)} do not match layout labels {layout.labels}")
        locs = {}
        for label, op in per_subsystem.items():
            if not isinstance(op, OperatorMatrix):
                op = OperatorMatrix(op)
            if op.dim != layout.dim_of(label):
                raise ValueError(f"charge on {label!r} has dim {op.dim}, "
                                 f"layout says {layout.dim_of(label)}")
            op.require_hermitian(ATOL_ALGEBRA)
            locs[label] = op
        n1 = _operator_norm(locs[layout.labels[0]].matrix)
        n2 = _operator_norm(locs[layout.labels[1]].matrix)
        if abs(n1 - n2) > ATOL_UNITARY:
            raise ValueError(
                f"computational charges must have equal operator norm, got {n1} and {n2}")
        object.__setattr__(self, "per_subsystem", locs)
        object.__setattr__(self, "layout", layout)

    def local(self, label: str) -> OperatorMatrix:
        return self.per_subsystem[label]

    def embedded(self, label: str) -> OperatorMatrix:
        """The local charge at ``label`` tensored with identity elsewhere."""
        ax = self.layout.axis(label)
        full = np.array([[1.0 + 0j]])
        for i, d in enumerate(self.layout.dims):
            full = np.kron(full, self.per_subsystem[self.layout.labels[i]].matrix
                           if i == ax else np.eye(d, dtype=complex))
        return OperatorMatrix(full, self.layout)

    @property
    def computational_norm(self) -> float:
        return _operator_norm(self.per_subsystem[self.layout.labels[0]].matrix)


def total_charge(cq: ConservedQuantity) -> OperatorMatrix:
    """Embedded sum of the local charges; hermitian on the full space."""
    dim = cq.layout.dim
    total = np.zeros((dim, dim), dtype=complex)
    for label in cq.layout.labels:
        total += cq.embedded(label).matrix
    return OperatorMatrix(total, cq.layout)


@dataclass(frozen=True)
class CommutantBasis:
    """Trace-orthonormal hermitian basis of {H : [H, charge] = 0}.

    ``blocks`` holds the orthonormal eigenvector matrix of each charge
    eigenspace; basis elements are grouped by block in a fixed order
    (diagonal dyad, then real and imaginary off-diagonal pairs), which is
    also the coefficient layout consumed by ``invariant_unitary``.
    """

    charge: OperatorMatrix
    elements: tuple
    blocks: tuple

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def block_dims(self) -> tuple:
        return tuple(b.shape[1] for b in self.blocks)

    def block_slices(self):
        """Per-block coefficient slices, in block order."""
        out = []
        k = 0
        for d in self.block_dims:
            out.append(slice(k, k + d * d))
            k += d * d
        return out


def _mgs_orthonormalize(mats):
    """Modified Gram-Schmidt under the trace inner product <A,B> = tr(A^dag B)."""
    out = []
    for m in mats:
        v = m.astype(complex)
        for b in out:
            v = v - np.trace(b.conj().T @ v) * b
        nrm = math.sqrt(abs(np.trace(v.conj().T @ v).real))
        if nrm < 1e-12:
            raise ValueError("degenerate commutant basis candidate")
        out.append(v / nrm)
    return out


def commutant_basis(charge: OperatorMatrix, cluster_tol: float = CLUSTER_TOL) -> CommutantBasis:
    """Spectral construction of the hermitian commutant of a hermitian charge.

    Eigenvalues within ``cluster_tol`` of each other are treated as a single
    eigenspace; the basis size is the sum of squared multiplicities.
    """
    charge.require_hermitian()
    w, v = np.linalg.eigh(charge.matrix)
    blocks = []
    start = 0
    for k in range(1, len(w) + 1):
        if k == len(w) or w[k] - w[start] > cluster_tol:
            blk = v[:, start:k].copy()
            blk.setflags(write=False)
            blocks.append(blk)
            start = k
    elements = []
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for blk in blocks:
        d = blk.shape[1]
        raw = []
        for p in range(d):
            vp = blk[:, p:p + 1]
            raw.append(vp @ vp.conj().T)
            for q in range(p + 1, d):
                vq = blk[:, q:q + 1]
                raw.append((vp @ vq.conj().T + vq @ vp.conj().T) * inv_sqrt2)
                raw.append((1j * vp @ vq.conj().T - 1j * vq @ vp.conj().T) * inv_sqrt2)
        for m in _mgs_orthonormalize(raw):
            elements.append(OperatorMatrix(m, charge.layout))
    return CommutantBasis(charge=charge, elements=tuple(elements), blocks=tuple(blocks))


def hermitian_from_coeffs(coeff, d: int) -> np.ndarray:
    """Hermitian d x d matrix from d^2 reals in the commutant coefficient layout.

    Layout per row p: diagonal entry, then (real, imaginary) pairs for each
    column q > p, matching the basis element order of ``commutant_basis``.
    """
    coeff = np.asarray(coeff, dtype=float)
    if coeff.shape != (d * d,):
        raise ValueError(f"expected {d * d} coefficients, got {coeff.shape}")
    h = np.zeros((d, d), dtype=complex)
    k = 0
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for p in range(d):
        h[p, p] = coeff[k]
        k += 1
        for q in range(p + 1, d):
            re, im = coeff[k], coeff[k + 1]
            k += 2
            h[p, q] = (re + 1j * im) * inv_sqrt2
            h[q, p] = (re - 1j * im) * inv_sqrt2
    return h


def block_generator(theta, basis: CommutantBasis, block_index: int) -> np.ndarray:
    """Hermitian generator of one block, in block coordinates."""
    sl = basis.block_slices()[block_index]
    return hermitian_from_coeffs(np.asarray(theta, dtype=float)[sl],
                                 basis.block_dims[block_index])


def project_to_basis(h: OperatorMatrix, basis: CommutantBasis) -> np.ndarray:
    """Coefficients of a hermitian H against the basis under the trace inner product.

    Exact when H lies in the commutant; otherwise returns the coefficients of
    the orthogonal projection onto it.
    """
    h.require_hermitian()
    return np.array([np.trace(b.matrix.conj().T @ h.matrix).real
                     for b in basis.elements])


def invariant_unitary(theta, basis: CommutantBasis) -> OperatorMatrix:
    """U = exp(i sum_k theta_k B_k); commutes with the charge by construction.

    Exponentiation runs block by block in the charge eigenbasis, which is
    exact because the generator is block diagonal there.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (basis.size,):
        raise ValueError(f"expected {basis.size} coefficients, got {theta.shape}")
    dim = basis.charge.dim
    u = np.zeros((dim, dim), dtype=complex)
    for i, blk in enumerate(basis.blocks):
        h = block_generator(theta, basis, i)
        w, s = np.linalg.eigh(h)
        ub = (s * np.exp(1j * w)) @ s.conj().T
        u += blk @ ub @ blk.conj().T
    return OperatorMatrix(u, basis.charge.layout)


def conservation_defect(u: OperatorMatrix, charge: OperatorMatrix) -> float:
    """Max-abs entry of [U, charge]; zero iff the conservation law holds."""
    if u.dim != charge.dim:
        raise ValueError(f"dimension mismatch: {u.dim} vs {charge.dim}")
    return max_abs(commutator(u.matrix, charge.matrix))


def nogo_offdiagonal_witness(l1: OperatorMatrix, l2: OperatorMatrix) -> float:
    """Obstruction to [U_CN, L1 + L2] = 0 from off-diagonal elements of L1.

    Returns max over a != b of |<a,0| (L1 + L2) - U_CN^dag (L1 + L2) U_CN |b,0>|.
    A nonzero value certifies that the controlled-NOT cannot satisfy the
    conservation law: were it conserved, both matrix elements would agree,
    forcing <a|L1|b> = 0 and hence diagonal L1.
    """
    for op in (l1, l2):
        if op.dim != 2:
            raise ValueError("computational charges must be 2x2")
        op.require_hermitian()
    u = cnot_matrix()
    total = np.kron(l1.matrix, np.eye(2)) + np.kron(np.eye(2), l2.matrix)
    diff = total - u.conj().T @ total @ u
    # |a,0> is basis index 2a
    return max(abs(diff[0, 2]), abs(diff[2, 0]))
