import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from corrqpt.errors import NotAStateError
from corrqpt.linalg import swap_operator, tensor
from corrqpt.sampling import random_density, random_pure_state, random_unitary
from corrqpt.serialize import matrix_from_json, matrix_to_json
from corrqpt.states import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    BipartiteState,
    assemble_bipartite,
    bloch_to_state,
    bloch_vector,
    correlation_matrix,
    density_matrix,
    maximally_mixed,
    purity,
    singlet,
    standard_basis,
)

S2 = np.sqrt(2)


def test_qubit_basis_is_scaled_paulis():
    b = standard_basis(2)
    expected = [np.eye(2) / S2, PAULI_X / S2, PAULI_Y / S2, PAULI_Z / S2]
    for el, ex in zip(b.elements, expected):
        assert np.allclose(el, ex, atol=1e-15)
    # hand check of Tr(L_j L_k) for the Pauli basis: Tr(s_i s_j) = 2 delta_ij
    assert np.allclose(b.gram(), np.eye(4), atol=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 8])
def test_basis_orthonormal_and_traceless(d):
    b = standard_basis(d)
    assert len(b) == d * d
    assert np.max(np.abs(b.gram() - np.eye(d * d))) < 1e-10
    assert np.array_equal(b[0], np.eye(d) / np.sqrt(d))
    for el in b.elements[1:]:
        assert abs(np.trace(el)) < 1e-14
        assert np.allclose(el, el.conj().T)


def test_basis_rejects_small_dimension():
    with pytest.raises(ValueError):
        standard_basis(1)


def test_basis_expansion_roundtrip(rng):
    b = standard_basis(3)
    rho = random_density(3, rng)
    assert np.allclose(b.expand(b.coefficients(rho)), rho)


def test_correlation_matrix_examples():
    prod = BipartiteState.product(bloch_to_state([0.1, 0.2, 0.3]), bloch_to_state([0, 0.5, 0]))
    assert np.max(np.abs(correlation_matrix(prod))) < 1e-12

    g = correlation_matrix(singlet())
    expected = np.zeros((4, 4))
    expected[1:, 1:] = -0.5 * np.eye(3)
    assert np.max(np.abs(g - expected)) < 1e-12

    classical = BipartiteState(np.diag([0.5, 0, 0, 0.5]), 2, 2)
    g = correlation_matrix(classical)
    # <Z (x) Z> = 1 and <Z> = 0 on both sides; the basis element is Z/sqrt2 on each factor
    zz = np.trace(classical.joint @ np.kron(PAULI_Z, PAULI_Z)).real / 2
    expected = np.zeros((4, 4))
    expected[3, 3] = zz
    assert zz == pytest.approx(0.5)
    assert np.max(np.abs(g - expected)) < 1e-12


def test_correlation_matrix_zero_border_and_real(rng):
    for d_a, d_b in [(2, 2), (2, 3), (3, 2)]:
        w = BipartiteState(random_density(d_a * d_b, rng), d_a, d_b)
        g = correlation_matrix(w)
        assert g.shape == (d_a**2, d_b**2)
        assert g.dtype == float
        assert np.all(g[0] == 0) and np.all(g[:, 0] == 0)


def test_assemble_examples(rng):
    ra, rb = random_density(2, rng), random_density(3, rng)
    w = assemble_bipartite(ra, rb, np.zeros((4, 9)))
    assert np.allclose(w.joint, tensor(ra, rb))

    gamma = np.zeros((4, 4))
    gamma[1:, 1:] = -0.5 * np.eye(3)
    w = assemble_bipartite(maximally_mixed(2), maximally_mixed(2), gamma)
    assert np.max(np.abs(w.joint - singlet().joint)) < 1e-12


def test_assemble_rejects_incompatible_gamma():
    gamma = np.zeros((4, 4))
    gamma[1:, 1:] = 0.5 * np.eye(3)
    # I/4 + (1/4) sum_i s_i (x) s_i = SWAP/2, whose spectrum is {-1/2, 1/2 x3}
    oracle = np.linalg.eigvalsh(swap_operator(2) / 2)[0]
    with pytest.raises(NotAStateError) as exc:
        assemble_bipartite(maximally_mixed(2), maximally_mixed(2), gamma)
    assert exc.value.min_eigenvalue == pytest.approx(oracle)
    assert oracle == pytest.approx(-0.5)


def test_assemble_rejects_nonzero_border():
    gamma = np.zeros((4, 4))
    gamma[0, 1] = 0.1
    with pytest.raises(ValueError):
        assemble_bipartite(maximally_mixed(2), maximally_mixed(2), gamma)


def test_decomposition_roundtrip_random_two_qubit(rng):
    for k in range(200):
        rank = int(rng.integers(1, 5))
        w = BipartiteState(random_density(4, rng, rank=rank), 2, 2)
        back = assemble_bipartite(w.rho_a, w.rho_b, correlation_matrix(w))
        assert np.max(np.abs(back.joint - w.joint)) < 1e-9
        assert np.max(np.abs(correlation_matrix(back) - correlation_matrix(w))) < 1e-10
        assert np.max(np.abs(back.rho_a - w.rho_a)) < 1e-10


def test_gamma_zero_iff_product(rng):
    for _ in range(50):
        ra, rb = random_density(2, rng), random_density(3, rng)
        w = BipartiteState.product(ra, rb)
        assert np.max(np.abs(correlation_matrix(w))) < 1e-9
    for _ in range(50):
        w = BipartiteState(random_density(6, rng), 2, 3)
        is_product = np.max(np.abs(w.joint - tensor(w.rho_a, w.rho_b))) < 1e-9
        gamma_zero = np.max(np.abs(correlation_matrix(w))) < 1e-9
        assert is_product == gamma_zero
        assert not gamma_zero  # generic states are correlated


def test_purity_bounds(rng):
    for d in (2, 3, 5):
        for _ in range(20):
            for rho in (random_density(d, rng), random_pure_state(d, rng)):
                assert 1 / d - 1e-10 <= purity(rho) <= 1 + 1e-10


def test_bloch_examples():
    assert np.allclose(bloch_to_state([0, 0, 0]), np.eye(2) / 2)
    assert np.allclose(bloch_to_state([0, 0, 1]), np.diag([1, 0]))
    assert np.allclose(bloch_to_state([1, 0, 0]), np.full((2, 2), 0.5))


def test_bloch_rejects_long_vectors():
    with pytest.raises(NotAStateError):
        bloch_to_state([0.8, 0.8, 0])


@given(
    st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)
)
def test_bloch_roundtrip(x, y, z):
    r = np.array([x, y, z])
    if np.linalg.norm(r) > 1:
        r = r / np.linalg.norm(r)
    assert np.max(np.abs(bloch_vector(bloch_to_state(r)) - r)) < 1e-12


def test_density_matrix_validation():
    with pytest.raises(NotAStateError):
        density_matrix(np.diag([1.2, -0.2]))
    with pytest.raises(NotAStateError):
        density_matrix(np.diag([0.5, 0.4]))
    with pytest.raises(NotAStateError):
        density_matrix(np.array([[0.5, 1], [0, 0.5]]))
    # tiny negative eigenvalues are clamped
    cleaned = density_matrix(np.diag([1 + 5e-11, -5e-11]))
    assert np.all(np.linalg.eigvalsh(cleaned) >= 0)


def test_unitary_invariance_of_purity(rng):
    rho, u = random_density(3, rng), random_unitary(3, rng)
    assert purity(u @ rho @ u.conj().T) == pytest.approx(purity(rho))


def test_matrix_json_roundtrip(rng):
    rho = random_density(3, rng)
    text = json.dumps(matrix_to_json(rho))
    assert np.array_equal(matrix_from_json(json.loads(text)), rho)
    g = correlation_matrix(singlet())
    assert np.array_equal(matrix_from_json(matrix_to_json(g)).real, g)


def test_matrix_json_alternate_layouts():
    assert np.array_equal(matrix_from_json([[1, 0], [0, 1]]), np.eye(2))
    flat = [[1, 0], [0, 1], [0, -1], [0, 0]]
    assert np.array_equal(matrix_from_json(flat), np.array([[1, 1j], [-1j, 0]]))
    with pytest.raises(ValueError):
        matrix_from_json([[1, 0], [0, 0], [2, 2]])
