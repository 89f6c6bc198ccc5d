import numpy as np
import pytest

from gatebound import (
    Implementation,
    OptimizationProblem,
    QubitAncilla,
    StateVector,
    invariant_unitary,
    problem_space,
)


def random_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector(v / np.linalg.norm(v))


def random_hermitian(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (m + m.conj().T) / 2


def random_unitary(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(m)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_density(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


def random_invariant_implementation(seed, ancilla_qubits=None):
    """A seeded conservation-respecting implementation with x-type charges.

    Returns (implementation, conserved_quantity).  The ancilla size defaults
    to a seeded draw from {0, 1, 2} qubits, with a random pure ancilla state.
    """
    rng = np.random.default_rng((seed, 9090))
    k = int(rng.integers(0, 3)) if ancilla_qubits is None else ancilla_qubits
    space = problem_space(OptimizationProblem(QubitAncilla(k)))
    theta = rng.normal(size=space.basis.size)
    u = invariant_unitary(theta, space.basis)
    if k == 0:
        xi = StateVector([1.0])
    else:
        xi = random_state(rng, 2 ** k)
    return Implementation(u, xi, space.layout), space.charge_quantity


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
