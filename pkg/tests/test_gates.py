import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ensemble_cluster.errors import InvalidArity, SameSite, SiteOutOfRange
from ensemble_cluster.gates import (
    CNOT,
    HADAMARD,
    X_SWAP,
    Z_FLIP,
    GateKind,
    GateStep,
    apply_step,
    cnot,
    hadamard,
    x_swap,
)
from ensemble_cluster.state import SiteLevel, StateVector, apply_site_matrix, basis_state, is_unitary

H, V, VAC = SiteLevel.H, SiteLevel.V, SiteLevel.VAC
S = 1 / np.sqrt(2)


def amps(state):
    return state.amplitudes


def superpose(*terms):
    out = sum(c * basis_state(levels).amplitudes for c, levels in terms)
    return StateVector(len(terms[0][1]), out)


def random_state(seed, n):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=3**n) + 1j * rng.normal(size=3**n)
    return StateVector(n, v / np.linalg.norm(v))


class TestHadamard:
    def test_v(self):
        np.testing.assert_allclose(amps(hadamard(basis_state([V]), 1)), amps(superpose((S, [H]), (S, [V]))), atol=1e-12)

    def test_h(self):
        np.testing.assert_allclose(amps(hadamard(basis_state([H]), 1)), amps(superpose((S, [H]), (-S, [V]))), atol=1e-12)

    def test_vac_fixed(self):
        assert np.array_equal(amps(hadamard(basis_state([VAC]), 1)), amps(basis_state([VAC])))

    def test_is_a_quarter_turn(self):
        # two pulses: H -> -V, V -> H; four pulses: -1 on the qubit block
        twice = HADAMARD @ HADAMARD
        np.testing.assert_allclose(twice[1:, 1:], [[0, 1], [-1, 0]], atol=1e-12)
        four = np.linalg.matrix_power(HADAMARD, 4)
        np.testing.assert_allclose(four, np.diag([1, -1, -1]), atol=1e-12)

    def test_undone_by_adjoint(self):
        psi = random_state(0, 2)
        back = apply_site_matrix(hadamard(psi, 2), 2, HADAMARD.conj().T)
        np.testing.assert_allclose(amps(back), amps(psi), atol=1e-12)

    def test_out_of_range(self):
        with pytest.raises(SiteOutOfRange):
            hadamard(basis_state([V]), 2)


class TestXSwap:
    def test_h_to_v(self):
        assert np.array_equal(amps(x_swap(basis_state([H]), 1)), amps(basis_state([V])))

    def test_involution(self):
        psi = random_state(1, 2)
        np.testing.assert_allclose(amps(x_swap(x_swap(psi, 1), 1)), amps(psi), atol=1e-12)

    def test_symmetric_superposition_invariant(self):
        plus = superpose((S, [H]), (S, [V]))
        np.testing.assert_allclose(amps(x_swap(plus, 1)), amps(plus), atol=1e-12)


class TestCnot:
    def test_bipartite_action(self):
        psi = superpose((S, [H, V]), (S, [V, V]))
        expected = superpose((S, [H, V]), (S, [V, H]))
        np.testing.assert_allclose(amps(cnot(psi, 1, 2)), amps(expected), atol=1e-12)

    def test_h_control_identity(self):
        assert np.array_equal(amps(cnot(basis_state([H, H]), 1, 2)), amps(basis_state([H, H])))

    def test_involution(self):
        psi = random_state(2, 3)
        np.testing.assert_allclose(amps(cnot(cnot(psi, 3, 1), 3, 1)), amps(psi), atol=1e-12)

    def test_reversed_sites(self):
        assert cnot(basis_state([H, V]), 2, 1).amplitude([V, V]) == 1

    @pytest.mark.parametrize("levels", [[VAC, V], [V, VAC], [VAC, VAC], [VAC, H]])
    def test_vac_branches_untouched(self, levels):
        assert np.array_equal(amps(cnot(basis_state(levels), 1, 2)), amps(basis_state(levels)))

    def test_same_site(self):
        with pytest.raises(SameSite):
            cnot(basis_state([H, H]), 1, 1)

    def test_out_of_range(self):
        with pytest.raises(SiteOutOfRange):
            cnot(basis_state([H, H]), 1, 3)


class TestGateStep:
    def test_cnot_needs_two(self):
        with pytest.raises(InvalidArity):
            GateStep(GateKind.CNOT, (1,))

    def test_cnot_distinct(self):
        with pytest.raises(SameSite):
            GateStep(GateKind.CNOT, (2, 2))

    def test_single_needs_one(self):
        with pytest.raises(InvalidArity):
            GateStep(GateKind.HADAMARD, (1, 2))

    def test_dispatch_hadamard(self):
        out = apply_step(basis_state([V]), GateStep(GateKind.HADAMARD, (1,)))
        np.testing.assert_allclose(amps(out), amps(superpose((S, [H]), (S, [V]))), atol=1e-12)

    def test_dispatch_x(self):
        out = apply_step(basis_state([H]), GateStep(GateKind.X, (1,)))
        assert np.array_equal(amps(out), amps(basis_state([V])))

    def test_dispatch_cnot(self):
        out = apply_step(basis_state([V, V]), GateStep(GateKind.CNOT, (1, 2)))
        assert np.array_equal(amps(out), amps(basis_state([V, H])))


class TestAlgebra:
    @pytest.mark.parametrize("m", [HADAMARD, X_SWAP, Z_FLIP, CNOT], ids=["H", "X", "Z", "CNOT"])
    def test_unitary(self, m):
        assert is_unitary(m)

    def test_x_and_cnot_square_to_identity(self):
        np.testing.assert_allclose(X_SWAP @ X_SWAP, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(CNOT @ CNOT, np.eye(9), atol=1e-12)

    def test_conjugating_swap_gives_z(self):
        np.testing.assert_allclose(HADAMARD @ X_SWAP @ HADAMARD.conj().T, Z_FLIP, atol=1e-12)

    def test_plain_sandwich_gives_swap(self):
        np.testing.assert_allclose(HADAMARD @ X_SWAP @ HADAMARD, X_SWAP, atol=1e-12)

    @pytest.mark.parametrize("m", [HADAMARD, X_SWAP, Z_FLIP], ids=["H", "X", "Z"])
    def test_vac_row_and_column_identity(self, m):
        assert m[0, 0] == 1
        assert not m[0, 1:].any() and not m[1:, 0].any()


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), gate=st.sampled_from(["h", "x"]))
def test_cnot_commutes_with_third_site(seed, gate):
    psi = random_state(seed, 3)
    single = hadamard if gate == "h" else x_swap
    a = single(cnot(psi, 1, 2), 3)
    b = cnot(single(psi, 3), 1, 2)
    np.testing.assert_allclose(amps(a), amps(b), atol=1e-12)
