import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from corrqpt.channels import compose, depolarizing, identity, is_cp, phase_damping, unitary_map
from corrqpt.dynamics import (
    DynamicsSetup,
    TimeFamily,
    depolarizing_dilation,
    effective_transform,
    f_xi_split,
    family_at,
    intermediate_map,
    positivity_scan,
    preimage_scan,
    reduced_map,
    semigroup_check,
    unitary_image_test,
    xi_from_correlations,
)
from corrqpt.errors import NonInvertibleMapError, NotCPTPError, NotUnitaryError
from corrqpt.linalg import partial_trace
from corrqpt.preparation import Factorized, PreparingOps, SingletPostselect, SwapTarget
from corrqpt.sampling import (
    bloch_shell,
    random_channel,
    random_density,
    random_hermitian,
    random_unitary,
)
from corrqpt.states import (
    PAULI_X,
    PAULI_Z,
    BipartiteState,
    direction_state,
    maximally_mixed,
    singlet,
)

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
KET0 = np.diag([1.0, 0.0]).astype(complex)


def direct_output(u, rho, env):
    """Tr_B[U (rho (x) env) U^dag] with an explicit partial trace."""
    d_a, d_b = rho.shape[0], env.shape[0]
    joint = u @ np.kron(rho, env) @ u.conj().T
    return np.einsum("ibjb->ij", joint.reshape(d_a, d_b, d_a, d_b))


def test_reduced_map_matches_direct_partial_trace(rng):
    for d_a, d_b in [(2, 2), (2, 3), (3, 2)]:
        for _ in range(10):
            u = random_unitary(d_a * d_b, rng)
            env = random_density(d_b, rng, rank=int(rng.integers(1, d_b + 1)))
            m = reduced_map(u, env, (d_a, d_b))
            rho = random_density(d_a, rng)
            assert np.max(np.abs(m.apply(rho) - direct_output(u, rho, env))) < 1e-12
            assert is_cp(m).is_cp and m.tp_deviation() < 1e-10


def test_setup_rejects_non_unitary():
    with pytest.raises(NotUnitaryError, match="unitarity violation"):
        DynamicsSetup(Factorized(KET0), 1.01 * np.eye(4))


def test_swap_makes_output_the_environment(rng):
    xi = random_density(2, rng)
    setup = DynamicsSetup(Factorized(xi), SWAP)
    for _ in range(5):
        rho = random_density(2, rng)
        rho_in, rho_out = effective_transform(setup, rho)
        assert np.allclose(rho_in, rho) and np.allclose(rho_out, xi)


@given(st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda v: np.linalg.norm(v) > 0.1))
def test_singlet_swap_flips_every_pure_state(v):
    n = np.array(v) / np.linalg.norm(v)
    setup = DynamicsSetup(SingletPostselect(), SWAP)
    rho_in, rho_out = effective_transform(setup, n)
    assert np.allclose(rho_out, direction_state(-n), atol=1e-12)
    assert np.allclose(rho_in + rho_out, np.eye(2), atol=1e-12)


def test_f_xi_split_singlet_swap():
    split = f_xi_split(DynamicsSetup(SingletPostselect(), SWAP))
    assert split.F.distance(depolarizing(0)) < 1e-12
    for rho, xi in zip(split.inputs, split.xi):
        perp = np.eye(2) - rho
        assert np.allclose(xi, perp - np.eye(2) / 2)
    assert split.max_xi_trace() < 1e-12
    assert split.max_xi_norm() == pytest.approx(0.5)


def test_f_xi_split_needs_reference_environment():
    with pytest.raises(ValueError):
        f_xi_split(DynamicsSetup(SwapTarget(lambda r: r), SWAP))


def test_f_xi_split_vanishes_for_product_omega(rng):
    for _ in range(50):
        omega = BipartiteState.product(random_density(2, rng), random_density(2, rng))
        ops = tuple(random_channel(2, rng) for _ in range(3))
        split = f_xi_split(DynamicsSetup(PreparingOps(omega, ops), random_unitary(4, rng)))
        assert split.max_xi_norm() < 1e-10


def test_f_xi_split_correlated_preparing_ops(rng):
    for _ in range(20):
        omega = BipartiteState(random_density(4, rng), 2, 2)
        ops = tuple(random_channel(2, rng) for _ in range(4))
        p = PreparingOps(omega, ops)
        u = random_unitary(4, rng)
        split = f_xi_split(DynamicsSetup(p, u))
        for i, (rho, xi) in enumerate(zip(split.inputs, split.xi)):
            w = p.prepare(i)
            # local TP operations on A leave the environment marginal alone, so F is shared
            assert np.max(np.abs(w.rho_b - omega.rho_b)) < 1e-12
            assert reduced_map(u, w.rho_b, (2, 2)).distance(split.F) < 1e-10
            assert abs(np.trace(xi)) < 1e-10
            assert np.max(np.abs(xi - xi_from_correlations(u, w))) < 1e-10
            assert np.allclose(split.F.apply(rho) + xi, direct_output_joint(u, w))


def direct_output_joint(u, w):
    return partial_trace(u @ w.joint @ u.conj().T, w.dims, keep="A")


def test_time_family_examples():
    tf = TimeFamily(np.zeros((4, 4)), KET0)
    assert tf(0.7).distance(identity(2)) < 1e-15
    tf = TimeFamily(SWAP, KET0)
    assert tf(0).distance(identity(2)) < 1e-12
    # SWAP^2 = I so exp(-i SWAP pi/2) = -i SWAP: full exchange
    assert np.allclose(family_at(tf, np.pi / 2).apply(np.eye(2) / 2), KET0)
    with pytest.raises(ValueError):
        tf(-1.0)


def test_time_family_cp_and_unital(rng):
    h = random_hermitian(4, rng)
    tf = TimeFamily(h, random_density(2, rng))
    unital = TimeFamily(SWAP, maximally_mixed(2))
    for t in np.linspace(0, 3, 13):
        m = tf(t)
        assert is_cp(m).is_cp and m.tp_deviation() < 1e-10
        assert np.allclose(unital(t).apply(np.eye(2) / 2), np.eye(2) / 2)


def test_intermediate_map_example():
    lam = intermediate_map(depolarizing(0.5), depolarizing(0.8))
    assert lam.distance(depolarizing(1.6)) < 1e-12
    assert is_cp(lam).min_eigenvalue == pytest.approx(-0.3)
    with pytest.raises(NonInvertibleMapError):
        intermediate_map(depolarizing(0), depolarizing(0.5), label=(0.0, 1.0))


def test_intermediate_maps_preserve_trace_and_hermiticity(rng):
    for _ in range(100):
        e1, e2 = random_channel(2, rng), random_channel(2, rng)
        lam = intermediate_map(e1, e2)
        assert lam.tp_deviation() < 1e-9
        assert lam.hermiticity_deviation() < 1e-9
        assert compose(lam, e1).distance(e2) < 1e-9


def test_cocycle_and_initial_time(rng):
    tf = TimeFamily(random_hermitian(4, rng), random_density(2, rng))
    t1, t2, t3 = 0.3, 0.6, 1.1
    e1, e2, e3 = tf(t1), tf(t2), tf(t3)
    assert intermediate_map(e1, e3).distance(compose(intermediate_map(e2, e3), intermediate_map(e1, e2))) < 1e-9
    assert intermediate_map(tf(0), e2).distance(e2) < 1e-12


def test_positivity_scan_shells():
    m = depolarizing(1.6)
    inside = positivity_scan(m, bloch_shell(0.6, 200, seed=1), seed=1)
    assert inside.violating == 0 and inside.tested == 200
    outside = positivity_scan(m, bloch_shell(0.7, 200, seed=2), seed=2)
    assert outside.violating == 200
    assert outside.worst_eigenvalue == pytest.approx((1 - 1.6 * 0.7) / 2)
    assert len(outside.witnesses) == 10


def test_preimage_scan_matches_image_radius():
    # the image of the Bloch ball under depolarizing(x) is the ball of radius |x|
    e1 = depolarizing(-1 / 3)
    assert preimage_scan(e1, bloch_shell(1 / 3 - 1e-6, 100, seed=3)).violating == 0
    assert preimage_scan(e1, bloch_shell(0.34, 100, seed=4)).violating == 100


def test_semigroup_holds_for_local_hamiltonian(rng):
    h_a = random_hermitian(2, rng)
    tf = TimeFamily(np.kron(h_a, np.eye(2)), random_density(2, rng))
    assert all(v.holds for v in semigroup_check(tf, [(0.2, 0.5), (1.0, 0.3)]))
    assert all(v.holds for v in semigroup_check(TimeFamily(np.zeros((4, 4)), KET0), [(0.4, 0.4)]))
    # exact exponential dephasing family
    dephase = lambda t: phase_damping(1 - np.exp(-t))
    assert all(v.holds for v in semigroup_check(dephase, [(0.1, 0.2), (0.5, 1.5)], tol=1e-12))


def test_semigroup_fails_for_partial_swap():
    tf = TimeFamily(SWAP, KET0)
    grid = np.linspace(0.2, 1.0, 5)
    verdicts = semigroup_check(tf, list(itertools.product(grid, grid)), tol=1e-6)
    assert len(verdicts) == 25
    assert not any(v.holds for v in verdicts)


def test_unitary_image_examples():
    res = unitary_image_test(unitary_map(PAULI_X), seed=5)
    assert res.unitary_like and res.choi_rank == 1 and res.witness is None
    res = unitary_image_test(depolarizing(0.5), seed=5)
    assert not res.unitary_like and res.witness_purity == pytest.approx(0.625)
    res = unitary_image_test(phase_damping(), seed=5)
    assert not res.unitary_like and 0.5 <= res.witness_purity < 1
    plus = direction_state([1, 0, 0])
    assert np.allclose(phase_damping().apply(plus), np.eye(2) / 2)
    with pytest.raises(NotCPTPError):
        unitary_image_test(depolarizing(1.6))


def test_depolarizing_dilation():
    for x in (-1 / 3, 0.0, 0.5, 0.9, 1.0):
        u, xi = depolarizing_dilation(x)
        assert np.allclose(u @ u.conj().T, np.eye(8))
        assert reduced_map(u, xi, (2, 4)).distance(depolarizing(x)) < 1e-12
    with pytest.raises(ValueError):
        depolarizing_dilation(-0.5)


def test_product_unitary_gives_local_channel(rng):
    u_a = random_unitary(2, rng)
    split = f_xi_split(DynamicsSetup(PreparingOps(singlet(), (identity(2),)), np.kron(u_a, PAULI_Z)))
    assert split.max_xi_norm() < 1e-12
    assert split.F.distance(unitary_map(u_a)) < 1e-12
    # CNOT couples singlet correlations into the output
    split = f_xi_split(DynamicsSetup(PreparingOps(singlet(), (identity(2),)), CNOT))
    assert split.max_xi_norm() > 0.1
