import math

import numpy as np
import pytest

from gatebound import (
    ConservedQuantity,
    FockAncilla,
    Implementation,
    OperatorMatrix,
    OptimizationProblem,
    SearchConfig,
    StateVector,
    SystemLayout,
    bosonic_bound,
    bosonic_deltaL3,
    bosonic_size,
    chain_bound,
    cnot_matrix,
    coherent_state,
    commutator,
    delta_squared_closed_form,
    deviation_analysis,
    deviation_operators,
    expectation,
    fundamental_bound,
    imperfection_lower_bound,
    invariant_unitary,
    kraus_vectors,
    max_abs,
    noise_commutation_residuals,
    number_operator,
    pauli_embed,
    plus_x_state,
    plus_y_state,
    problem_space,
    qubit_size_bound,
    rms_deviation,
    sigma,
    std_dev,
    witness_input,
)
from conftest import random_invariant_implementation, random_state, random_unitary

FAST = SearchConfig(starts=8, max_iter=300, seed=0)


def cnot_with_ancilla(da=2):
    xi = np.zeros(da, dtype=complex)
    xi[0] = 1.0
    return Implementation.embed(cnot_matrix(), xi)


def x_charge_for(impl):
    from gatebound import x_sum_charge
    labels = impl.layout.labels
    charges = {"C": sigma("X"), "T": sigma("X")}
    if len(labels) > 2:
        k = int(math.log2(impl.ancilla_dim))
        charges["A"] = x_sum_charge(k)
    return ConservedQuantity(charges, impl.layout)


class TestDeviationOperators:
    def test_cnot_closed_forms(self):
        impl = cnot_with_ancilla()
        lay = impl.layout
        z1 = pauli_embed("Z", "C", lay).matrix
        z2 = pauli_embed("Z", "T", lay).matrix
        dev = deviation_operators(impl).D
        eye = np.eye(lay.dim)
        assert max_abs(dev[(1, 1)].matrix) <= 1e-12
        assert max_abs(dev[(1, 2)].matrix - (z1 - z2)) <= 1e-12
        assert max_abs(dev[(2, 1)].matrix - z1 @ (z2 - eye)) <= 1e-12
        assert max_abs(dev[(2, 2)].matrix - (z1 - eye) @ z2) <= 1e-12

    def test_identity_implementation(self):
        impl = Implementation.embed(np.eye(4))
        dev = deviation_operators(impl).D
        lay = impl.layout
        z1 = pauli_embed("Z", "C", lay).matrix
        z2 = pauli_embed("Z", "T", lay).matrix
        assert max_abs(dev[(1, 1)].matrix) == 0.0
        assert max_abs(dev[(2, 2)].matrix) == 0.0
        assert max_abs(dev[(1, 2)].matrix - (z1 - z2)) == 0.0


class TestRmsDeviation:
    def test_cnot_is_perfect(self, rng):
        impl = cnot_with_ancilla()
        for _ in range(10):
            psi = random_state(rng, 2)
            assert rms_deviation(impl, psi, 1, 1) <= 1e-12
            assert rms_deviation(impl, psi, 2, 1) <= 1e-12

    def test_identity_delta12_analytic(self):
        # <(Z1 - Z2)^2> = <2 - 2 Z1 Z2> = 2 at psi = plus, target |0>
        impl = Implementation.embed(np.eye(4))
        assert rms_deviation(impl, plus_x_state(), 1, 2) == pytest.approx(
            math.sqrt(2.0), abs=1e-12)

    def test_dominates_standard_deviation(self, rng):
        for seed in range(6):
            impl, _ = random_invariant_implementation(seed)
            psi = random_state(rng, 2)
            analysis = deviation_analysis(impl, psi)
            state = witness_input(psi, impl)
            for key, delta in analysis.delta.items():
                spread = std_dev(analysis.D[key], state)
                assert delta >= spread - 1e-10

    def test_index_validation(self):
        impl = cnot_with_ancilla()
        with pytest.raises(ValueError):
            rms_deviation(impl, plus_x_state(), 0, 1)


class TestNoiseCommutation:
    def test_invariant_implementations_satisfy_identities(self):
        for seed in range(12):
            impl, cq = random_invariant_implementation(seed)
            res = noise_commutation_residuals(impl, cq)
            assert res.conserved
            assert res.r1 <= 1e-10
            assert res.r2 <= 1e-10

    def test_general_local_charges(self, rng):
        # identities only need conservation plus locality, not x-type charges
        from gatebound import commutant_basis, total_charge
        lay = SystemLayout((2, 2, 2), ("C", "T", "A"))
        for _ in range(6):
            l1 = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            l1 = (l1 + l1.conj().T) / 2
            n1 = np.max(np.abs(np.linalg.eigvalsh(l1)))
            l2 = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            l2 = (l2 + l2.conj().T) / 2
            l2 *= n1 / np.max(np.abs(np.linalg.eigvalsh(l2)))
            l3 = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            l3 = (l3 + l3.conj().T) / 2
            cq = ConservedQuantity({"C": l1, "T": l2, "A": l3}, lay)
            basis = commutant_basis(total_charge(cq))
            u = invariant_unitary(rng.normal(size=basis.size), basis)
            impl = Implementation(u, random_state(rng, 2), lay)
            res = noise_commutation_residuals(impl, cq)
            assert res.conserved and max(res.r1, res.r2) <= 1e-8

    def test_cnot_with_x_charge_violates(self):
        impl = cnot_with_ancilla()
        res = noise_commutation_residuals(impl, x_charge_for(impl))
        assert not res.conserved
        assert res.r1 > 1e-3 and res.r2 > 1e-3
        assert res.r1 == pytest.approx(2.0, abs=1e-12)

    def test_heisenberg_commutator_identities_any_unitary(self, rng):
        # the three exchange identities need only locality, no conservation
        lay = SystemLayout((2, 2, 2), ("C", "T", "A"))
        for _ in range(10):
            u = random_unitary(rng, 8)
            impl = Implementation(OperatorMatrix(u), random_state(rng, 2), lay)
            l1 = np.kron((lambda m: (m + m.conj().T) / 2)(
                rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))), np.eye(4))
            l2 = np.kron(np.kron(np.eye(2), (lambda m: (m + m.conj().T) / 2)(
                rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))), np.eye(2))
            l3 = np.kron(np.eye(4), (lambda m: (m + m.conj().T) / 2)(
                rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))))
            z1 = pauli_embed("Z", "C", lay).matrix
            pr = lambda a: u.conj().T @ a @ u
            dev = deviation_operators(impl).D
            d11, d21 = dev[(1, 1)].matrix, dev[(2, 1)].matrix
            assert max_abs(commutator(z1, pr(l1)) - commutator(pr(l1), d21)) <= 1e-9
            assert max_abs(commutator(z1, pr(l2)) - commutator(pr(l2), d11)) <= 1e-9
            assert max_abs(commutator(z1, pr(l3)) - commutator(pr(l3), d11)) <= 1e-9
            assert max_abs(commutator(z1, pr(l3)) - commutator(pr(l3), d21)) <= 1e-9


class TestImperfectionBound:
    def test_spin_y_witness_value(self):
        for seed in range(6):
            impl, cq = random_invariant_implementation(seed)
            res = imperfection_lower_bound(impl, cq, plus_y_state())
            assert res.commutator_abs == pytest.approx(2.0, abs=1e-10)
            want = 2.0 / (2.0 + res.delta_l3_prime) ** 2
            assert res.lhs == pytest.approx(want, abs=1e-10)
            assert res.holds

    def test_z_eigenstate_gives_zero_numerator(self):
        impl, cq = random_invariant_implementation(3)
        res = imperfection_lower_bound(impl, cq, StateVector([1.0, 0.0]))
        assert res.commutator_abs <= 1e-12
        assert res.lhs <= 1e-12
        assert res.holds

    def test_monte_carlo_sweep(self):
        # seeded sweep over ancilla sizes and random inputs
        for seed in range(60):
            impl, cq = random_invariant_implementation(seed)
            rng = np.random.default_rng((seed, 31))
            psi = random_state(rng, 2)
            for state in (psi, plus_y_state()):
                res = imperfection_lower_bound(impl, cq, state)
                assert res.lhs <= res.rhs + 1e-9

    def test_rejects_conservation_violation(self):
        impl = cnot_with_ancilla()
        with pytest.raises(ValueError):
            imperfection_lower_bound(impl, x_charge_for(impl), plus_y_state())


class TestClosedFormDeltas:
    def test_ideal_cnot_vanishes(self):
        cf = delta_squared_closed_form(kraus_vectors(cnot_with_ancilla()))
        assert cf.d11_sq == pytest.approx(0.0, abs=1e-12)
        assert cf.d21_sq == pytest.approx(0.0, abs=1e-12)

    def test_matches_direct_rms_at_equatorial_states(self):
        for seed in range(10):
            impl, _ = random_invariant_implementation(seed)
            cf = delta_squared_closed_form(kraus_vectors(impl))
            for psi in (plus_x_state(), plus_y_state()):
                assert cf.d11_sq == pytest.approx(
                    rms_deviation(impl, psi, 1, 1) ** 2, abs=1e-9)
                assert cf.d21_sq == pytest.approx(
                    rms_deviation(impl, psi, 2, 1) ** 2, abs=1e-9)

    def test_bounded_by_basis_infidelities(self):
        from gatebound import basis_fidelity
        for seed in range(10):
            impl, _ = random_invariant_implementation(seed)
            table = kraus_vectors(impl)
            cf = delta_squared_closed_form(table)
            f00 = basis_fidelity(table, 0, 0)
            f10 = basis_fidelity(table, 1, 0)
            cap = 4.0 * (1 - f00 ** 2) + 4.0 * (1 - f10 ** 2)
            assert cf.d11_sq + cf.d21_sq <= cap + 1e-9


class TestFundamentalBound:
    def test_no_ancilla_floor_is_one_sixteenth(self):
        impl, cq = random_invariant_implementation(1, ancilla_qubits=0)
        report = fundamental_bound(impl, cq, FAST)
        assert report.delta_L3_prime == 0.0
        assert report.lower_bound == 0.0625
        assert report.size == 2.0
        assert report.satisfied
        assert report.margin == report.measured_infidelity - report.lower_bound
        assert report.measured_cb_lower >= report.measured_infidelity

    def test_monte_carlo_never_violated(self):
        for seed in range(25):
            impl, cq = random_invariant_implementation(seed)
            report = fundamental_bound(impl, cq, FAST)
            assert report.satisfied
            assert report.measured_infidelity >= report.lower_bound - 1e-9

    def test_rejects_non_x_charges(self):
        impl, _ = random_invariant_implementation(0, ancilla_qubits=0)
        lay = impl.layout
        zq = ConservedQuantity({"C": sigma("Z"), "T": sigma("Z")}, lay)
        with pytest.raises(ValueError):
            fundamental_bound(impl, zq, FAST)

    def test_rejects_violating_unitary(self):
        impl = cnot_with_ancilla()
        with pytest.raises(ValueError):
            fundamental_bound(impl, x_charge_for(impl), FAST)


class TestClosedFormBounds:
    def test_qubit_size_values(self):
        assert qubit_size_bound(2) == 0.0625
        assert qubit_size_bound(3) == 1.0 / 36.0
        assert qubit_size_bound(10) == 1.0 / 400.0
        with pytest.raises(ValueError):
            qubit_size_bound(1)

    def test_bosonic_values(self):
        assert bosonic_bound(1.0) == 0.0625
        assert bosonic_bound(4.0) == 0.015625
        assert bosonic_size(4.0) == 4.0
        # size-based floor agrees with the photon-number floor
        s = bosonic_size(4.0)
        assert 1.0 / (4.0 * s * s) == bosonic_bound(4.0)
        with pytest.raises(ValueError):
            bosonic_bound(0.0)
        with pytest.raises(ValueError):
            bosonic_size(-1.0)

    def test_chain_values(self):
        assert chain_bound(1, 2.0) == 0.0625
        assert chain_bound(3, 2.0) == pytest.approx(1.0 / 432.0, rel=1e-15)
        assert chain_bound(3, 2.0) == pytest.approx(
            (1.0 / (4.0 * (3 * 2.0) ** 2)) / 3.0, rel=1e-12)
        with pytest.raises(ValueError):
            chain_bound(0, 2.0)
        with pytest.raises(ValueError):
            chain_bound(2, 1.5)

    def test_size_bound_monotone_in_spread(self):
        # any implementation with spread at most n - 2 is floored at 1/(4n^2)
        for n in (2, 3, 6):
            dl3 = n - 2.0
            assert qubit_size_bound(n) <= 1.0 / (4.0 * (2.0 + dl3) ** 2) + 1e-15


class TestBosonicDeltaL3:
    @staticmethod
    def _fock_setup(trunc, alpha, theta_scale=0.0, seed=0):
        problem = OptimizationProblem(FockAncilla(trunc, alpha))
        space = problem_space(problem)
        rng = np.random.default_rng((seed, 55))
        theta = rng.normal(size=space.basis.size) * theta_scale
        u = invariant_unitary(theta, space.basis)
        impl = Implementation(u, space.xi0, space.layout)
        return impl, space.charge_quantity

    def test_identity_implementation_poisson_spread(self):
        impl, cq = self._fock_setup(24, 2.0)
        res = bosonic_deltaL3(impl, cq)
        assert res.mean_photons == pytest.approx(4.0, abs=1e-6)
        assert res.measured == pytest.approx(2.0 * math.sqrt(4.0), abs=1e-6)
        assert res.cap == pytest.approx(2.0 * math.sqrt(6.0), abs=1e-8)

    def test_vacuum_ancilla(self):
        impl, cq = self._fock_setup(16, 0.0)
        res = bosonic_deltaL3(impl, cq)
        assert res.measured == pytest.approx(0.0, abs=1e-10)
        assert res.cap == pytest.approx(2.0 * math.sqrt(2.0), abs=1e-12)

    def test_random_invariant_respects_cap(self):
        for seed in range(8):
            impl, cq = self._fock_setup(24, 2.0, theta_scale=1.0, seed=seed)
            res = bosonic_deltaL3(impl, cq)
            assert res.measured <= res.cap + 1e-6

    def test_truncation_warning(self):
        with pytest.warns(UserWarning):
            xi = coherent_state(3.0, 16)  # warns here too: |alpha|^2 > trunc/4
        lay = SystemLayout((2, 2, 16), ("C", "T", "A"))
        impl = Implementation(OperatorMatrix(np.eye(64), lay), xi, lay)
        cq = ConservedQuantity(
            {"C": sigma("X"), "T": sigma("X"), "A": 2.0 * number_operator(16).matrix}, lay)
        with pytest.warns(UserWarning):
            bosonic_deltaL3(impl, cq)

    def test_rejects_non_coherent_state(self):
        trunc = 16
        lay = SystemLayout((2, 2, trunc), ("C", "T", "A"))
        fock3 = np.zeros(trunc, dtype=complex)
        fock3[3] = 1.0
        impl = Implementation(OperatorMatrix(np.eye(4 * trunc), lay),
                              StateVector(fock3), lay)
        cq = ConservedQuantity(
            {"C": sigma("X"), "T": sigma("X"), "A": 2.0 * number_operator(trunc).matrix}, lay)
        with pytest.raises(ValueError):
            bosonic_deltaL3(impl, cq)

    def test_rejects_wrong_charge(self):
        impl, _ = self._fock_setup(16, 1.0)
        lay = impl.layout
        from gatebound import x_sum_charge
        cq = ConservedQuantity({"C": sigma("X"), "T": sigma("X"),
                                "A": np.diag(np.arange(16)).astype(complex)}, lay)
        with pytest.raises(ValueError):
            bosonic_deltaL3(impl, cq)


class TestRobertson:
    def test_uncertainty_relation(self, rng):
        for _ in range(40):
            d = int(rng.integers(2, 6))
            m1 = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            m2 = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            a = OperatorMatrix((m1 + m1.conj().T) / 2)
            b = OperatorMatrix((m2 + m2.conj().T) / 2)
            psi = random_state(rng, d)
            lhs = abs(expectation(OperatorMatrix(
                a.matrix @ b.matrix - b.matrix @ a.matrix), psi))
            rhs = 2.0 * std_dev(a, psi) * std_dev(b, psi)
            assert lhs <= rhs + 1e-9
