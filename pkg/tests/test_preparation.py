import numpy as np
import pytest
from hypothesis import given, strategies as st

from corrqpt.channels import depolarizing, from_kraus, identity, not_map, transpose_map, unitary_map
from corrqpt.errors import NotCPTPError
from corrqpt.linalg import tensor
from corrqpt.preparation import (
    Compatibility,
    Factorized,
    PreparingOps,
    SingletPostselect,
    SwapTarget,
    apply_local,
    check_marginal,
    compatibility_check,
    gamma_transform_law,
    postselection_mixture,
    preparator_compatibility,
    preparing_op_matrix,
)
from corrqpt.sampling import random_channel, random_density, random_unitary
from corrqpt.states import (
    PAULI_X,
    PAULI_Z,
    BipartiteState,
    direction_state,
    maximally_mixed,
    singlet,
)

KET0 = np.diag([1.0, 0.0]).astype(complex)
KET1 = np.diag([0.0, 1.0]).astype(complex)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)

unit_vectors = st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda v: 0.1 < np.linalg.norm(v)).map(
    lambda v: np.array(v) / np.linalg.norm(v)
)


def pauli_gamma(joint):
    """Correlations in the normalized Pauli basis, computed term by term from traces."""
    basis = [np.eye(2), PAULI_X, np.array([[0, -1j], [1j, 0]]), PAULI_Z]
    basis = [b / np.sqrt(2) for b in basis]
    rho_a = joint.reshape(2, 2, 2, 2).trace(axis1=1, axis2=3)
    rho_b = joint.reshape(2, 2, 2, 2).trace(axis1=0, axis2=2)
    g = np.zeros((4, 4))
    for j, lj in enumerate(basis):
        for k, lk in enumerate(basis):
            both = np.trace(np.kron(lj, lk) @ joint).real
            g[j, k] = both - np.trace(lj @ rho_a).real * np.trace(lk @ rho_b).real
    return g


def test_factorized_prepare():
    p = Factorized(maximally_mixed(2))
    w = p.prepare(KET0)
    assert np.allclose(w.joint, np.diag([0.5, 0.5, 0, 0]))


def test_swap_target_prepare():
    p = SwapTarget(KET1)
    w = p.prepare(KET0)
    assert np.allclose(w.joint, tensor(KET0, KET1))
    plus = direction_state([1, 0, 0])
    q = SwapTarget(lambda r: not_map().apply(r))
    assert np.allclose(q.prepare(plus).rho_b, direction_state([-1, 0, 0]))


def test_singlet_postselect_prepare():
    p = SingletPostselect()
    w = p.prepare([0, 0, 1])
    assert np.allclose(w.joint, tensor(KET0, KET1))
    w = p.prepare([1, 0, 0])
    assert np.allclose(w.rho_b, direction_state([-1, 0, 0]))
    assert np.allclose(w.joint, tensor(w.rho_a, w.rho_b))


def test_preparing_ops_prepare():
    p = PreparingOps(singlet(), (identity(2), unitary_map(PAULI_X)))
    assert np.allclose(p.prepare(0).joint, singlet().joint)
    assert np.allclose(p.prepare(1).rho_a, maximally_mixed(2))
    with pytest.raises(IndexError):
        p.prepare(5)


def test_apply_local_matches_kraus_on_joint(rng):
    m = random_channel(2, rng, rank=2)
    joint = random_density(4, rng)
    direct = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2))
            e[i, j] = 1
            direct += np.kron(m.apply(e), joint.reshape(2, 2, 2, 2)[i, :, j, :])
    assert np.allclose(apply_local(m, joint, (2, 2)), direct)


def test_marginal_property_random_requests(rng):
    factorized = Factorized(random_density(3, rng))
    swap = SwapTarget(random_density(2, rng))
    post = SingletPostselect()
    for _ in range(100):
        rho = random_density(2, rng)
        assert check_marginal(factorized, rho) < 1e-9
        assert check_marginal(swap, rho) < 1e-9
        n = rng.normal(size=3)
        assert check_marginal(post, n / np.linalg.norm(n)) < 1e-9
    ops = tuple(random_channel(2, rng) for _ in range(100))
    p = PreparingOps(BipartiteState(random_density(4, rng), 2, 2), ops)
    for i in range(100):
        assert check_marginal(p, i) < 1e-9


@given(unit_vectors)
def test_singlet_postselection_is_product_with_antiparallel_partner(n):
    w = SingletPostselect().prepare(n)
    assert np.allclose(w.rho_b, direction_state(-n), atol=1e-12)
    assert np.max(np.abs(w.joint - tensor(w.rho_a, w.rho_b))) < 1e-12


def test_postselection_mixture():
    w = postselection_mixture([(0, 0, 1), (0, 0, -1)], [0.5, 0.5])
    assert np.allclose(w.joint, np.diag([0, 0.5, 0.5, 0]))
    assert pauli_gamma(w.joint)[3, 3] == pytest.approx(-0.5)
    with pytest.raises(ValueError):
        postselection_mixture([(0, 0, 1)], [0.7])


def test_preparing_op_matrix_row_zero(rng):
    for _ in range(20):
        phi = preparing_op_matrix(random_channel(2, rng))
        assert np.allclose(phi[0], [1, 0, 0, 0])
    assert np.allclose(preparing_op_matrix(identity(3)), np.eye(9))
    assert np.allclose(preparing_op_matrix(depolarizing(0.4)), np.diag([1, 0.4, 0.4, 0.4]))


def test_gamma_law_examples():
    p = PreparingOps(singlet(), (identity(2), unitary_map(PAULI_X), depolarizing(0)))
    law = gamma_transform_law(p, 0)
    assert np.allclose(law.after, np.diag([0, -0.5, -0.5, -0.5]))
    law = gamma_transform_law(p, 1)
    assert np.allclose(law.after, np.diag([0, -0.5, 0.5, 0.5]))
    assert np.allclose(gamma_transform_law(p, 2).after, 0)


def test_gamma_law_random(rng):
    for _ in range(50):
        omega = BipartiteState(random_density(4, rng), 2, 2)
        ops = (random_channel(2, rng, rank=int(rng.integers(1, 5))),)
        p = PreparingOps(omega, ops)
        law = gamma_transform_law(p, 0)
        assert law.deviation < 1e-9
        assert np.max(np.abs(law.after - pauli_gamma(p.prepare(0).joint))) < 1e-10
        assert np.max(np.abs(law.before - pauli_gamma(omega.joint))) < 1e-10


def test_preparing_ops_rejects_non_cptp():
    with pytest.raises(NotCPTPError, match="trace-preserving"):
        PreparingOps(singlet(), (from_kraus([np.diag([1.0, 0.5])]),))
    with pytest.raises(NotCPTPError, match="completely positive"):
        PreparingOps(singlet(), (transpose_map(2),))


def test_compatibility_examples():
    w = singlet()
    assert compatibility_check(w, np.eye(4)) is Compatibility.PRODUCT_U
    assert compatibility_check(w, np.kron(PAULI_X, PAULI_Z)) is Compatibility.PRODUCT_U
    assert compatibility_check(w, SWAP) is Compatibility.PRODUCT_U_SWAP
    assert compatibility_check(w, CNOT) is Compatibility.INCOMPATIBLE
    prod = BipartiteState.product(KET0, maximally_mixed(2))
    assert compatibility_check(prod, CNOT) is Compatibility.GAMMA_ZERO
    assert not Compatibility.INCOMPATIBLE.compatible and Compatibility.GAMMA_ZERO.compatible


def test_factorized_and_fixed_swap_target_gamma_zero(rng):
    for _ in range(20):
        u = random_unitary(4, rng)
        assert preparator_compatibility(Factorized(random_density(2, rng)), u) is Compatibility.GAMMA_ZERO
        assert preparator_compatibility(SwapTarget(random_density(2, rng)), u) is Compatibility.GAMMA_ZERO


def test_request_dependent_environment_is_incompatible():
    post = SingletPostselect()
    assert preparator_compatibility(post, SWAP) is Compatibility.INCOMPATIBLE
    assert preparator_compatibility(post, CNOT) is Compatibility.INCOMPATIBLE
    assert preparator_compatibility(post, np.kron(PAULI_X, np.eye(2))) is Compatibility.PRODUCT_U
    flip = SwapTarget(lambda r: not_map().apply(r))
    assert preparator_compatibility(flip, SWAP) is Compatibility.INCOMPATIBLE
    # every individual prepared state is nonetheless a product
    assert compatibility_check(post.prepare([0, 0, 1]), SWAP) is Compatibility.GAMMA_ZERO


def test_preparing_ops_compatibility():
    p = PreparingOps(singlet(), (identity(2),))
    assert preparator_compatibility(p, CNOT) is Compatibility.INCOMPATIBLE
    assert preparator_compatibility(p, SWAP) is Compatibility.PRODUCT_U_SWAP
