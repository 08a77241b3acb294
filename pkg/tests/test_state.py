import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ensemble_cluster.errors import DimensionMismatch, InvalidArity, NotUnitary, SiteOutOfRange
from ensemble_cluster.gates import HADAMARD, X_SWAP
from ensemble_cluster.protocol import run_protocol
from ensemble_cluster.state import (
    PauliString,
    SiteLevel,
    StateVector,
    apply_site_matrix,
    basis_state,
    decode_index,
    encode_levels,
    expectation,
    inner_product,
    product_state,
)

H, V, VAC = SiteLevel.H, SiteLevel.V, SiteLevel.VAC


def random_unitary(rng, d=3):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(rng, n):
    v = rng.normal(size=3**n) + 1j * rng.normal(size=3**n)
    return StateVector(n, v / np.linalg.norm(v))


class TestSiteLevel:
    def test_fixed_encoding(self):
        assert (int(VAC), int(H), int(V)) == (0, 1, 2)

    @pytest.mark.parametrize("level", list(SiteLevel))
    def test_round_trip(self, level):
        assert SiteLevel(int(level)) is level


class TestBasisState:
    def test_single_v(self):
        psi = basis_state([V])
        assert psi.amplitudes[2] == 1
        assert np.count_nonzero(psi.amplitudes) == 1

    def test_two_v(self):
        psi = basis_state([V, V])
        assert psi.amplitudes[2 + 2 * 3] == 1
        assert np.count_nonzero(psi.amplitudes) == 1

    def test_vac(self):
        assert basis_state([VAC]).amplitudes[0] == 1

    def test_empty(self):
        with pytest.raises(InvalidArity):
            basis_state([])

    @pytest.mark.parametrize("n", range(1, 7))
    def test_index_round_trip(self, n):
        for idx in range(3**n):
            assert encode_levels(decode_index(idx, n)) == idx

    def test_wrong_length(self):
        with pytest.raises(DimensionMismatch):
            StateVector(2, np.zeros(8))

    def test_immutable(self):
        psi = basis_state([H])
        with pytest.raises(ValueError):
            psi.amplitudes[0] = 1


class TestInnerProduct:
    def test_normalized(self):
        assert inner_product(basis_state([V]), basis_state([V])) == 1

    def test_orthogonal(self):
        assert inner_product(basis_state([H]), basis_state([V])) == 0

    def test_vv_coefficient_of_two_site_cluster(self):
        assert inner_product(basis_state([V, V]), run_protocol(2)) == pytest.approx(0.5, abs=1e-12)

    def test_conjugates_left(self):
        a = StateVector(1, [0, 1j, 0])
        b = basis_state([H])
        assert inner_product(a, b) == pytest.approx(-1j)

    def test_mismatch(self):
        with pytest.raises(DimensionMismatch):
            inner_product(basis_state([H]), basis_state([H, H]))


class TestApplySiteMatrix:
    def test_identity_bitwise(self):
        psi = random_state(np.random.default_rng(0), 3)
        out = apply_site_matrix(psi, 2, np.eye(3))
        assert np.array_equal(out.amplitudes, psi.amplitudes)

    def test_swap_h_to_v(self):
        out = apply_site_matrix(basis_state([H]), 1, X_SWAP)
        assert np.array_equal(out.amplitudes, basis_state([V]).amplitudes)

    def test_acts_on_right_site(self):
        out = apply_site_matrix(basis_state([H, H, H]), 2, X_SWAP)
        assert out.amplitude([H, V, H]) == 1

    def test_inverse(self):
        rng = np.random.default_rng(1)
        psi = random_state(rng, 3)
        u = random_unitary(rng)
        back = apply_site_matrix(apply_site_matrix(psi, 3, u), 3, u.conj().T)
        np.testing.assert_allclose(back.amplitudes, psi.amplitudes, atol=1e-12)

    def test_site_range(self):
        with pytest.raises(SiteOutOfRange):
            apply_site_matrix(basis_state([H, H]), 3, np.eye(3))
        with pytest.raises(SiteOutOfRange):
            apply_site_matrix(basis_state([H, H]), 0, np.eye(3))

    def test_not_unitary(self):
        with pytest.raises(NotUnitary):
            apply_site_matrix(basis_state([H]), 1, 2 * np.eye(3))
        apply_site_matrix(basis_state([H]), 1, 2 * np.eye(3), unitary=False)

    def test_matches_kron(self):
        rng = np.random.default_rng(2)
        psi = random_state(rng, 3)
        u = random_unitary(rng)
        # little-endian: site 1 is the last kron factor
        full = np.kron(np.eye(3), np.kron(u, np.eye(3)))
        np.testing.assert_allclose(apply_site_matrix(psi, 2, u).amplitudes, full @ psi.amplitudes, atol=1e-12)


class TestExpectation:
    def test_z_on_h(self):
        assert expectation(basis_state([H]), PauliString("Z")) == 1

    def test_z_on_v(self):
        assert expectation(basis_state([V]), PauliString("Z")) == -1

    def test_cluster_two_x1z2(self):
        assert expectation(run_protocol(2), PauliString("XZ")) == pytest.approx(1, abs=1e-12)

    def test_cluster_two_z1x2(self):
        assert expectation(run_protocol(2), PauliString("ZX")) == pytest.approx(-1, abs=1e-12)

    def test_sign(self):
        assert expectation(basis_state([H]), PauliString("Z", -1)) == -1

    def test_identity_on_vac(self):
        assert expectation(basis_state([VAC]), PauliString("X")) == 1

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            expectation(basis_state([H, H]), PauliString("Z"))

    def test_bad_labels(self):
        with pytest.raises(ValueError):
            PauliString("XQ")


def test_product_state_site_order():
    h = np.array([0, 1, 0])
    v = np.array([0, 0, 1])
    psi = product_state([h, v, v])
    assert psi.amplitude([H, V, V]) == 1


n_sites = st.integers(min_value=1, max_value=4)


@settings(max_examples=40, deadline=None)
@given(n=n_sites, seed=st.integers(0, 2**32 - 1), depth=st.integers(1, 8))
def test_unitaries_preserve_norm(n, seed, depth):
    rng = np.random.default_rng(seed)
    psi = random_state(rng, n)
    for _ in range(depth):
        site = int(rng.integers(1, n + 1))
        psi = apply_site_matrix(psi, site, random_unitary(rng))
    assert abs(psi.norm_squared() - 1) < 1e-12


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 4), seed=st.integers(0, 2**32 - 1), data=st.data())
def test_disjoint_sites_commute(n, seed, data):
    i, j = data.draw(st.lists(st.integers(1, n), min_size=2, max_size=2, unique=True))
    rng = np.random.default_rng(seed)
    psi = random_state(rng, n)
    a, b = random_unitary(rng), random_unitary(rng)
    ab = apply_site_matrix(apply_site_matrix(psi, i, a), j, b)
    ba = apply_site_matrix(apply_site_matrix(psi, j, b), i, a)
    np.testing.assert_allclose(ab.amplitudes, ba.amplitudes, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(n=n_sites, seed=st.integers(0, 2**32 - 1))
def test_all_identity_string_is_one(n, seed):
    psi = random_state(np.random.default_rng(seed), n)
    assert expectation(psi, PauliString("I" * n)) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("labels", ["".join(p) for p in itertools.product("IXYZ", repeat=2)])
def test_pauli_expectations_are_real(labels):
    psi = random_state(np.random.default_rng(3), 2)
    e = expectation(psi, PauliString(labels))
    assert -1 - 1e-12 <= e <= 1 + 1e-12


def test_hadamard_constant_is_unitary():
    psi = apply_site_matrix(basis_state([V]), 1, HADAMARD)
    assert abs(psi.norm_squared() - 1) < 1e-12
