"""Dense complex operator algebra over small multipartite Hilbert spaces.

Everything here is a pure function over immutable value types.  Matrices and
state vectors are plain ``numpy`` arrays wrapped in thin dataclasses that
validate their defining invariants on construction.  Subsystem ordering is
most-significant-first, matching ket notation ``|a, b, k>``: the flat basis
index is ``a * (d_T * d_A) + b * d_A + k``, which is exactly the ordering
produced by ``numpy.kron`` applied left to right.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# Numeric tolerances: algebraic identities get double-precision headroom,
# unitarity / complete-positivity checks a little slack on top.
ATOL_ALGEBRA = 1e-12
ATOL_UNITARY = 1e-10
ATOL_CP = 1e-9

__all__ = [
    "ATOL_ALGEBRA",
    "ATOL_UNITARY",
    "ATOL_CP",
    "SystemLayout",
    "OperatorMatrix",
    "StateVector",
    "DensityOperator",
    "LayoutError",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "sigma",
    "tensor",
    "partial_trace",
    "hermitian_exp",
    "pauli_embed",
    "number_operator",
    "coherent_state",
    "coherent_truncation",
    "expectation",
    "std_dev",
    "trace_distance",
    "commutator",
    "max_abs",
]


class LayoutError(ValueError):
    """Raised when a subsystem label or dimension does not match a layout."""


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_PAULI = {"X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


def sigma(kind: str) -> np.ndarray:
    """Return a copy of the single-qubit Pauli matrix ``X``, ``Y`` or ``Z``."""
    try:
        return _PAULI[kind].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli kind {kind!r}; expected 'X', 'Y' or 'Z'")


def max_abs(a: np.ndarray) -> float:
    """Largest absolute entry; the default operator-deviation norm here."""
    return float(np.max(np.abs(a))) if a.size else 0.0


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


@dataclass(frozen=True)
class SystemLayout:
    """Ordered subsystem dimensions with unique labels, e.g. C, T, A."""

    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __init__(self, dims: Iterable[int], labels: Iterable[str]):
        dims = tuple(int(d) for d in dims)
        labels = tuple(str(s) for s in labels)
        if len(dims) != len(labels):
            raise LayoutError("dims and labels must have equal length")
        if not dims:
            raise LayoutError("layout needs at least one subsystem")
        if any(d < 2 for d in dims):
            raise LayoutError(f"subsystem dimensions must be >= 2, got {dims}")
        if len(set(labels)) != len(labels):
            raise LayoutError(f"labels must be unique, got {labels}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    def axis(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LayoutError(f"unknown subsystem label {label!r}; have {self.labels}")

    def dim_of(self, label: str) -> int:
        return self.dims[self.axis(label)]

    def __len__(self) -> int:
        return len(self.dims)


def _as_square_complex(entries) -> np.ndarray:
    m = np.array(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    m.setflags(write=False)
    return m


def _check_layout(dim: int, layout: SystemLayout | None):
    if layout is not None and layout.dim != dim:
        raise LayoutError(f"layout dimension {layout.dim} != object dimension {dim}")


@dataclass(frozen=True)
class OperatorMatrix:
    """A dense complex square matrix, optionally tagged with a system layout."""

    matrix: np.ndarray
    layout: SystemLayout | None = None

    def __init__(self, matrix, layout: SystemLayout | None = None):
        m = _as_square_complex(matrix)
        _check_layout(m.shape[0], layout)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "layout", layout)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.matrix.conj().T, self.layout)

    def is_hermitian(self, tol: float = ATOL_ALGEBRA) -> bool:
        return max_abs(self.matrix - self.matrix.conj().T) <= tol

    def is_unitary(self, tol: float = ATOL_UNITARY) -> bool:
        d = self.dim
        return max_abs(self.matrix.conj().T @ self.matrix - np.eye(d)) <= tol

    def require_hermitian(self, tol: float = ATOL_ALGEBRA) -> "OperatorMatrix":
        if not self.is_hermitian(tol):
            raise ValueError("matrix is not hermitian within tolerance")
        return self

    def require_unitary(self, tol: float = ATOL_UNITARY) -> "OperatorMatrix":
        if not self.is_unitary(tol):
            raise ValueError("matrix is not unitary within tolerance")
        return self

    def debug_dict(self) -> dict:
        """Loss-free plain-python form for JSON debugging dumps."""
        return {
            "dim": self.dim,
            "re": self.matrix.real.tolist(),
            "im": self.matrix.imag.tolist(),
            "labels": list(self.layout.labels) if self.layout else None,
            "dims": list(self.layout.dims) if self.layout else None,
        }


@dataclass(frozen=True)
class StateVector:
    """A pure state; unit norm unless explicitly flagged unnormalized."""

    amplitudes: np.ndarray
    layout: SystemLayout | None = None
    normalized: bool = True

    def __init__(self, amplitudes, layout: SystemLayout | None = None,
                 normalized: bool = True):
        v = np.array(amplitudes, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise ValueError("amplitudes must be finite")
        _check_layout(v.shape[0], layout)
        if normalized and abs(np.linalg.norm(v) - 1.0) > ATOL_ALGEBRA:
            raise ValueError(
                f"state norm {np.linalg.norm(v)!r} deviates from 1 beyond {ATOL_ALGEBRA}")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "normalized", normalized)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def projector(self) -> np.ndarray:
        v = self.amplitudes
        return np.outer(v, v.conj())


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, unit-trace, positive-semidefinite matrix."""

    matrix: np.ndarray
    layout: SystemLayout | None = None

    def __init__(self, matrix, layout: SystemLayout | None = None):
        m = _as_square_complex(matrix)
        _check_layout(m.shape[0], layout)
        if max_abs(m - m.conj().T) > ATOL_ALGEBRA:
            raise ValueError("density operator is not hermitian within 1e-12")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > ATOL_UNITARY:
            raise ValueError(f"density operator trace {tr} deviates from 1")
        if float(np.min(np.linalg.eigvalsh((m + m.conj().T) / 2))) < -ATOL_UNITARY:
            raise ValueError("density operator has a negative eigenvalue")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "layout", layout)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_state(cls, psi: StateVector) -> "DensityOperator":
        return cls(psi.projector(), psi.layout)


def tensor(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    """Kronecker product with concatenated layout (left factor most significant)."""
    layout = None
    if a.layout is not None and b.layout is not None:
        layout = SystemLayout(a.layout.dims + b.layout.dims,
                              a.layout.labels + b.layout.labels)
    return OperatorMatrix(np.kron(a.matrix, b.matrix), layout)


def _partial_trace_array(m: np.ndarray, dims: Sequence[int], keep_axes: Sequence[int]) -> np.ndarray:
    k = len(dims)
    t = m.reshape(tuple(dims) + tuple(dims))
    drop = [ax for ax in range(k) if ax not in keep_axes]
    for ax in sorted(drop, reverse=True):
        t = np.trace(t, axis1=ax, axis2=ax + t.ndim // 2)
    d_keep = math.prod(dims[ax] for ax in keep_axes) if keep_axes else 1
    return t.reshape(d_keep, d_keep)


def partial_trace(rho: DensityOperator, layout: SystemLayout, keep) -> DensityOperator:
    """Reduce ``rho`` to the subsystems named in ``keep`` (original order kept).

    ``keep`` may be a label or any iterable of labels; it must be a nonempty
    subset of the layout labels.
    """
    if isinstance(keep, str):
        keep = (keep,)
    keep = tuple(keep)
    if not keep:
        raise LayoutError("keep must name at least one subsystem")
    keep_axes = sorted(layout.axis(s) for s in keep)
    if len(set(keep_axes)) != len(keep):
        raise LayoutError(f"duplicate labels in keep: {keep}")
    _check_layout(rho.dim, layout)
    out = _partial_trace_array(rho.matrix, layout.dims, keep_axes)
    sub = SystemLayout(tuple(layout.dims[ax] for ax in keep_axes),
                       tuple(layout.labels[ax] for ax in keep_axes))
    return DensityOperator(out, sub)


def hermitian_exp(h: OperatorMatrix, scale: float = 1.0) -> OperatorMatrix:
    """exp(i * scale * H) for hermitian H, via spectral decomposition.

    All matrix exponentials in this project have hermitian generators, so the
    eigendecomposition route is exact and keeps the result unitary to
    machine precision.
    """
    h.require_hermitian()
    w, v = np.linalg.eigh(h.matrix)
    u = (v * np.exp(1j * scale * w)) @ v.conj().T
    return OperatorMatrix(u, h.layout)


def pauli_embed(kind: str, site: str, layout: SystemLayout) -> OperatorMatrix:
    """Single-site Pauli at ``site`` tensored with identity elsewhere."""
    ax = layout.axis(site)
    if layout.dims[ax] != 2:
        raise ValueError(f"site {site!r} has dimension {layout.dims[ax]}, need 2")
    op = sigma(kind)
    factors = [np.eye(d, dtype=complex) for d in layout.dims]
    factors[ax] = op
    full = factors[0]
    for f in factors[1:]:
        full = np.kron(full, f)
    return OperatorMatrix(full, layout)


def number_operator(trunc: int) -> OperatorMatrix:
    """Photon-number operator diag(0, 1, ..., trunc-1) on a truncated Fock space."""
    if trunc < 2:
        raise ValueError(f"truncation must be >= 2, got {trunc}")
    return OperatorMatrix(np.diag(np.arange(trunc, dtype=float)).astype(complex))


def coherent_truncation(alpha: complex) -> int:
    """Truncation making the neglected coherent tail mass < 1e-8."""
    a = abs(alpha)
    return max(16, math.ceil(a * a + 6 * a + 8))


def coherent_state(alpha: complex, trunc: int) -> StateVector:
    """Truncated coherent state with amplitudes proportional to alpha^n / sqrt(n!).

    Renormalized after truncation.  Warns when ``|alpha|^2 > trunc / 4``,
    i.e. when the neglected Poisson tail is not negligible.
    """
    if trunc < 2:
        raise ValueError(f"truncation must be >= 2, got {trunc}")
    a = abs(alpha)
    if a * a > trunc / 4:
        warnings.warn(
            f"coherent truncation {trunc} is small for |alpha|^2 = {a * a:.3g}; "
            "tail mass may not be negligible", stacklevel=2)
    if a == 0.0:
        v = np.zeros(trunc, dtype=complex)
        v[0] = 1.0
        return StateVector(v)
    n = np.arange(trunc)
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, trunc)))))
    log_mag = n * math.log(a) - 0.5 * log_fact
    mag = np.exp(log_mag - log_mag.max())
    phase = np.exp(1j * n * np.angle(complex(alpha)))
    v = mag * phase
    return StateVector(v / np.linalg.norm(v))


def expectation(a: OperatorMatrix, psi: StateVector) -> complex:
    """<psi| A |psi>."""
    if a.dim != psi.dim:
        raise ValueError(f"dimension mismatch: operator {a.dim}, state {psi.dim}")
    v = psi.amplitudes
    return complex(np.vdot(v, a.matrix @ v))


def std_dev(a: OperatorMatrix, psi: StateVector) -> float:
    """Standard deviation <(A - <A>)^2>^(1/2) of hermitian A in |psi>."""
    a.require_hermitian()
    if a.dim != psi.dim:
        raise ValueError(f"dimension mismatch: operator {a.dim}, state {psi.dim}")
    v = psi.amplitudes
    av = a.matrix @ v
    mean = np.vdot(v, av).real
    second = np.vdot(av, av).real
    return math.sqrt(max(second - mean * mean, 0.0))


def trace_distance(s1: DensityOperator, s2: DensityOperator) -> float:
    """Half the trace norm of s1 - s2; lies in [0, 1] for density operators."""
    if s1.dim != s2.dim:
        raise ValueError(f"dimension mismatch: {s1.dim} vs {s2.dim}")
    diff = s1.matrix - s2.matrix
    eig = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
    return float(np.sum(np.abs(eig)) / 2)
