import math

import numpy as np
import pytest

from gatebound import (
    DensityOperator,
    LayoutError,
    OperatorMatrix,
    StateVector,
    SystemLayout,
    coherent_state,
    coherent_truncation,
    expectation,
    hermitian_exp,
    max_abs,
    number_operator,
    partial_trace,
    pauli_embed,
    sigma,
    std_dev,
    swap_matrix,
    tensor,
    trace_distance,
)
from conftest import random_density, random_hermitian, random_state, random_unitary

CT = SystemLayout((2, 2), ("C", "T"))


class TestLayout:
    def test_basic(self):
        lay = SystemLayout((2, 2, 3), ("C", "T", "A"))
        assert lay.dim == 12
        assert lay.axis("T") == 1
        assert lay.dim_of("A") == 3

    def test_errors(self):
        with pytest.raises(LayoutError):
            SystemLayout((2, 2), ("C", "C"))
        with pytest.raises(LayoutError):
            SystemLayout((2, 1), ("C", "T"))
        with pytest.raises(LayoutError):
            SystemLayout((2, 2, 2), ("C", "T"))
        with pytest.raises(LayoutError):
            SystemLayout((), ())


class TestValueTypes:
    def test_operator_validation(self):
        with pytest.raises(ValueError):
            OperatorMatrix(np.ones((2, 3)))
        with pytest.raises(ValueError):
            OperatorMatrix(np.array([[np.inf, 0], [0, 1]]))
        with pytest.raises(LayoutError):
            OperatorMatrix(np.eye(3), CT)

    def test_flags(self):
        assert OperatorMatrix(sigma("Y")).is_hermitian()
        assert OperatorMatrix(sigma("Y")).is_unitary()
        assert not OperatorMatrix(np.diag([1.0, 2.0])).is_unitary()
        with pytest.raises(ValueError):
            OperatorMatrix(np.array([[0, 1], [0, 0]])).require_hermitian()

    def test_state_norm(self):
        with pytest.raises(ValueError):
            StateVector([1.0, 1.0])
        sv = StateVector([0.5, 0.5], normalized=False)
        assert sv.norm() == pytest.approx(math.sqrt(0.5))

    def test_density_validation(self, rng):
        rho = DensityOperator(random_density(rng, 3))
        assert rho.dim == 3
        with pytest.raises(ValueError):
            DensityOperator(np.diag([0.7, 0.7]))
        with pytest.raises(ValueError):
            DensityOperator(np.diag([1.5, -0.5]))
        with pytest.raises(ValueError):
            DensityOperator(np.array([[0.5, 0.5], [0.1, 0.5]]))


class TestTensor:
    def test_identity(self):
        out = tensor(OperatorMatrix(np.eye(2)), OperatorMatrix(np.eye(2)))
        assert np.array_equal(out.matrix, np.eye(4))

    def test_z_tensor_identity(self):
        out = tensor(OperatorMatrix(sigma("Z")), OperatorMatrix(np.eye(2)))
        assert np.array_equal(out.matrix, np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex))

    def test_xx_flips_both(self):
        xx = tensor(OperatorMatrix(sigma("X")), OperatorMatrix(sigma("X")))
        v00 = np.array([1, 0, 0, 0], dtype=complex)
        assert np.array_equal(xx.matrix @ v00, np.array([0, 0, 0, 1], dtype=complex))

    def test_associative_exact_on_dyadic_entries(self, rng):
        # dyadic rationals multiply exactly in binary floating point
        pool = np.array([0.0, 0.5, 1.0, -0.5, 0.25, -1.0])
        mats = [pool[rng.integers(0, len(pool), size=(d, d))]
                + 1j * pool[rng.integers(0, len(pool), size=(d, d))]
                for d in (2, 3, 2)]
        a, b, c = (OperatorMatrix(m) for m in mats)
        left = tensor(tensor(a, b), c).matrix
        right = tensor(a, tensor(b, c)).matrix
        assert np.array_equal(left, right)

    def test_mixed_product_property(self, rng):
        for da, db in ((2, 2), (2, 3), (3, 3)):
            a, c = (rng.normal(size=(da, da)) + 1j * rng.normal(size=(da, da))
                    for _ in range(2))
            b, d = (rng.normal(size=(db, db)) + 1j * rng.normal(size=(db, db))
                    for _ in range(2))
            lhs = np.kron(a, b) @ np.kron(c, d)
            rhs = np.kron(a @ c, b @ d)
            assert max_abs(lhs - rhs) < 1e-12 * max(1.0, max_abs(rhs))

    def test_layout_concatenation(self):
        a = OperatorMatrix(np.eye(2), SystemLayout((2,), ("C",)))
        b = OperatorMatrix(np.eye(3), SystemLayout((3,), ("A",)))
        assert tensor(a, b).layout.labels == ("C", "A")


class TestPartialTrace:
    def test_product_state_factorization(self, rng):
        layout = SystemLayout((2, 3), ("S", "A"))
        rho = random_density(rng, 2)
        sig = random_density(rng, 3)
        joint = DensityOperator(np.kron(rho, sig), layout)
        out = partial_trace(joint, layout, {"S"})
        assert max_abs(out.matrix - rho) < 1e-12

    def test_bell_reduction(self):
        bell = np.zeros(4, dtype=complex)
        bell[0] = bell[3] = 1 / math.sqrt(2)
        rho = DensityOperator(np.outer(bell, bell.conj()), CT)
        out = partial_trace(rho, CT, {"C"})
        assert max_abs(out.matrix - np.eye(2) / 2) < 1e-12

    def test_against_index_loop_oracle(self, rng):
        # independent four-index contraction over the dropped subsystem
        layout = SystemLayout((2, 2, 2), ("C", "T", "A"))
        psi = random_state(rng, 8)
        rho = DensityOperator(psi.projector(), layout)
        out = partial_trace(rho, layout, {"C", "T"})
        oracle = np.zeros((4, 4), dtype=complex)
        full = rho.matrix.reshape(2, 2, 2, 2, 2, 2)
        for a in range(2):
            for b in range(2):
                for c in range(2):
                    for d in range(2):
                        for k in range(2):
                            oracle[2 * a + b, 2 * c + d] += full[a, b, k, c, d, k]
        assert max_abs(out.matrix - oracle) < 1e-12

    def test_invariance_under_ancilla_unitary(self, rng):
        layout = SystemLayout((2, 2, 3), ("C", "T", "A"))
        rho = random_density(rng, 12)
        v = random_unitary(rng, 3)
        u = np.kron(np.eye(4), v)
        rotated = DensityOperator(u @ rho @ u.conj().T, layout)
        base = partial_trace(DensityOperator(rho, layout), layout, {"C", "T"})
        rot = partial_trace(rotated, layout, {"C", "T"})
        assert max_abs(base.matrix - rot.matrix) < 1e-10

    def test_label_errors(self, rng):
        rho = DensityOperator(random_density(rng, 4), CT)
        with pytest.raises(LayoutError):
            partial_trace(rho, CT, {"Q"})
        with pytest.raises(LayoutError):
            partial_trace(rho, CT, set())


class TestHermitianExp:
    def test_half_pi_x(self):
        u = hermitian_exp(OperatorMatrix(sigma("X")), math.pi / 2)
        assert max_abs(u.matrix - 1j * sigma("X")) < 1e-12

    def test_zero_scale(self, rng):
        h = OperatorMatrix(random_hermitian(rng, 5))
        assert max_abs(hermitian_exp(h, 0.0).matrix - np.eye(5)) < 1e-12

    def test_swap_from_exchange_generator(self):
        x, y, z = sigma("X"), sigma("Y"), sigma("Z")
        gen = (-np.eye(4) + np.kron(x, x) + np.kron(y, y) + np.kron(z, z))
        u = hermitian_exp(OperatorMatrix(gen), -math.pi / 4)
        assert max_abs(u.matrix - swap_matrix()) < 1e-10

    def test_unitary_with_unit_circle_spectrum(self, rng):
        u = hermitian_exp(OperatorMatrix(random_hermitian(rng, 6)), 1.7)
        assert u.is_unitary(1e-10)
        assert np.max(np.abs(np.abs(np.linalg.eigvals(u.matrix)) - 1.0)) < 1e-10

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            hermitian_exp(OperatorMatrix(np.array([[0, 1], [0, 0]])))


class TestPauliEmbed:
    def test_z_sign_convention(self):
        z1 = pauli_embed("Z", "C", CT)
        for b in range(2):
            v = np.zeros(4, dtype=complex)
            v[b] = 1.0  # |0, b>
            assert np.array_equal(z1.matrix @ v, v)

    def test_commutator_zx_is_2iy(self):
        z1 = pauli_embed("Z", "C", CT).matrix
        x1 = pauli_embed("X", "C", CT).matrix
        y1 = pauli_embed("Y", "C", CT).matrix
        assert max_abs(z1 @ x1 - x1 @ z1 - 2j * y1) == 0.0

    def test_disjoint_supports_commute(self):
        z1 = pauli_embed("Z", "C", CT).matrix
        x2 = pauli_embed("X", "T", CT).matrix
        assert max_abs(z1 @ x2 - x2 @ z1) == 0.0

    def test_algebra_and_flags(self):
        for kind in "XYZ":
            p = pauli_embed(kind, "T", CT)
            assert p.is_hermitian() and p.is_unitary()
            assert abs(np.trace(p.matrix)) == 0.0
            assert np.array_equal(p.matrix @ p.matrix, np.eye(4))

    def test_site_dimension_error(self):
        layout = SystemLayout((2, 2, 3), ("C", "T", "A"))
        with pytest.raises(ValueError):
            pauli_embed("X", "A", layout)
        with pytest.raises(ValueError):
            sigma("Q")


class TestFockTools:
    def test_number_operator(self):
        n = number_operator(4)
        assert np.array_equal(n.matrix, np.diag([0.0, 1.0, 2.0, 3.0]).astype(complex))
        with pytest.raises(ValueError):
            number_operator(1)

    def test_vacuum(self):
        xi = coherent_state(0.0, 8)
        assert xi.amplitudes[0] == 1.0
        assert np.all(xi.amplitudes[1:] == 0.0)

    def test_poisson_statistics(self):
        xi = coherent_state(2.0, 64)
        n = number_operator(64)
        mean = expectation(n, xi).real
        assert abs(mean - 4.0) < 1e-6
        assert abs(std_dev(n, xi) ** 2 - 4.0) < 1e-6

    def test_truncation_warning(self):
        with pytest.warns(UserWarning):
            coherent_state(3.0, 16)  # |alpha|^2 = 9 > 16 / 4

    def test_truncation_rule(self):
        assert coherent_truncation(0.0) == 16
        assert coherent_truncation(2.0) == 24
        a = 2.0
        t = coherent_truncation(a)
        assert t >= a * a + 6 * a + 8

    def test_phase_carries_through(self):
        xi = coherent_state(1j, 24)
        # amplitude of |1> is alpha / sqrt(1!) up to overall normalization
        ratio = xi.amplitudes[1] / xi.amplitudes[0]
        assert abs(ratio - 1j) < 1e-12


class TestExpectationAndSpread:
    def test_eigenstate_has_zero_spread(self):
        assert std_dev(OperatorMatrix(sigma("Z")), StateVector([1.0, 0.0])) == 0.0

    def test_plus_state_unit_spread(self):
        plus = StateVector(np.array([1.0, 1.0]) / math.sqrt(2))
        assert std_dev(OperatorMatrix(sigma("Z")), plus) == pytest.approx(1.0, abs=1e-12)

    def test_commutator_witness_needs_spin_y(self):
        z1 = pauli_embed("Z", "C", CT).matrix
        x1 = pauli_embed("X", "C", CT).matrix
        comm = OperatorMatrix(z1 @ x1 - x1 @ z1, CT)
        ket0 = np.array([1.0, 0.0], dtype=complex)
        spin_y = np.array([1.0, 1.0j]) / math.sqrt(2)
        spin_x = np.array([1.0, 1.0]) / math.sqrt(2)
        at_y = abs(expectation(comm, StateVector(np.kron(spin_y, ket0), CT)))
        at_x = abs(expectation(comm, StateVector(np.kron(spin_x, ket0), CT)))
        assert at_y == pytest.approx(2.0, abs=1e-12)
        assert at_x < 1e-12

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            expectation(OperatorMatrix(np.eye(3)), random_state(rng, 2))
        with pytest.raises(ValueError):
            std_dev(OperatorMatrix(np.eye(3)), random_state(rng, 2))


class TestTraceDistance:
    def test_identical_states(self, rng):
        rho = DensityOperator(random_density(rng, 4))
        assert trace_distance(rho, rho) == 0.0

    def test_orthogonal_pure_states(self):
        r0 = DensityOperator(np.diag([1.0, 0.0]))
        r1 = DensityOperator(np.diag([0.0, 1.0]))
        assert trace_distance(r0, r1) == pytest.approx(1.0, abs=1e-12)

    def test_zero_vs_plus(self):
        plus = np.array([1.0, 1.0]) / math.sqrt(2)
        r0 = DensityOperator(np.diag([1.0, 0.0]))
        rp = DensityOperator(np.outer(plus, plus))
        assert trace_distance(r0, rp) == pytest.approx(1 / math.sqrt(2), abs=1e-12)

    def test_triangle_and_unitary_invariance(self, rng):
        for _ in range(25):
            a, b, c = (DensityOperator(random_density(rng, 4)) for _ in range(3))
            assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-10
            u = random_unitary(rng, 4)
            ra = DensityOperator(u @ a.matrix @ u.conj().T)
            rb = DensityOperator(u @ b.matrix @ u.conj().T)
            assert abs(trace_distance(ra, rb) - trace_distance(a, b)) < 1e-10

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            trace_distance(DensityOperator(random_density(rng, 2)),
                           DensityOperator(random_density(rng, 3)))
