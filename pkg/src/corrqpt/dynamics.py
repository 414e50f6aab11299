"""System dynamics ``E = Tr_B o U o P`` and time families of reduced maps.

Covers the split of a correlated-preparation dynamics into a CP part plus
a traceless correction, intermediate maps ``E_t2 o E_t1^-1`` between two
times, positivity domains, and the semigroup property.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .channels import CP_TOL, QuantumMap, compose, from_kraus, inverse, is_cp
from .errors import DimensionError, NotCPTPError, NotUnitaryError
from .linalg import (
    as_matrix,
    dagger,
    expm_hermitian,
    hermitian_eig,
    partial_trace,
    unitarity_deviation,
)
from .preparation import Preparator
from .states import (
    I2,
    PAULIS,
    BipartiteState,
    correlation_matrix,
    density_matrix,
    min_eigenvalue,
    purity,
    standard_basis,
)
from .sampling import random_states, rng_from

UNITARY_TOL = 1e-10
INVERTIBLE_CONDITION = 1e10


def _env_decomposition(env) -> tuple[np.ndarray, np.ndarray]:
    w, v = hermitian_eig(env)
    return np.clip(w, 0.0, None), v


def system_blocks(u, dims: tuple[int, int], env_basis: np.ndarray) -> np.ndarray:
    """``A[mu, nu] = (I (x) <mu|) U (I (x) |nu>)``.

    ``mu`` runs over the computational basis of B, ``nu`` over the columns
    of ``env_basis``. Returns an array of shape (d_B, d_B, d_A, d_A).
    """
    d_a, d_b = dims
    u4 = as_matrix(u).reshape(d_a, d_b, d_a, d_b)
    return np.einsum("amcd,dn->mnac", u4, env_basis)


def reduced_map(u, env, dims: tuple[int, int]) -> QuantumMap:
    """``rho -> Tr_B[U (rho (x) env) U^dag]`` as Kraus ``sqrt(lambda_nu) A_mu,nu``."""
    lam, vecs = _env_decomposition(env)
    blocks = system_blocks(u, dims, vecs)
    ops = [
        np.sqrt(lam[n]) * blocks[m, n]
        for m in range(dims[1])
        for n in range(dims[1])
        if lam[n] > 0
    ]
    return from_kraus(ops)


@dataclass(frozen=True, eq=False)
class DynamicsSetup:
    preparator: Preparator
    unitary: np.ndarray

    def __post_init__(self):
        u = as_matrix(self.unitary)
        n = self.preparator.dim_a * self.preparator.dim_b
        if u.shape != (n, n):
            raise DimensionError(f"unitary of shape {u.shape}, expected {n}x{n}")
        dev = unitarity_deviation(u)
        if dev > UNITARY_TOL:
            raise NotUnitaryError(dev)
        object.__setattr__(self, "unitary", u)

    @property
    def dims(self) -> tuple[int, int]:
        return self.preparator.dims

    @property
    def env_spectrum(self) -> tuple[np.ndarray, np.ndarray] | None:
        env = self.preparator.reference_environment()
        return None if env is None else _env_decomposition(env)


def evolve_joint(u, w: BipartiteState) -> np.ndarray:
    return u @ w.joint @ dagger(u)


def effective_transform(setup: DynamicsSetup, request) -> tuple[np.ndarray, np.ndarray]:
    """(system input, system output) for one preparation request."""
    w = setup.preparator.prepare(request)
    out = partial_trace(evolve_joint(setup.unitary, w), setup.dims, keep="A")
    return w.rho_a, density_matrix(out)


@dataclass(frozen=True, eq=False)
class FXiSplit:
    """``E[rho] = F[rho] + Xi_rho`` with ``F`` CP and ``Xi_rho`` traceless."""

    F: QuantumMap
    requests: list
    inputs: list[np.ndarray]
    xi: list[np.ndarray]

    def max_xi_trace(self) -> float:
        return max((abs(np.trace(x)) for x in self.xi), default=0.0)

    def max_xi_norm(self) -> float:
        return max((float(np.max(np.abs(x))) for x in self.xi), default=0.0)


def f_xi_split(setup: DynamicsSetup, requests=None) -> FXiSplit:
    """Separate the correlation-independent CP part of the dynamics.

    ``F`` is built from the request-independent environment state of the
    preparator; ``Xi`` is whatever the actual output adds on top of ``F``.
    """
    env = setup.preparator.reference_environment()
    if env is None:
        raise ValueError("preparator has no request-independent environment state")
    F = reduced_map(setup.unitary, env, setup.dims)
    requests = setup.preparator.default_requests() if requests is None else list(requests)
    inputs, xis = [], []
    for r in requests:
        rho_in, rho_out = effective_transform(setup, r)
        inputs.append(rho_in)
        xis.append(rho_out - F.apply(rho_in))
    return FXiSplit(F, requests, inputs, xis)


def xi_from_correlations(u, w: BipartiteState) -> np.ndarray:
    """Correlation term evaluated term by term from the correlation matrix:

        sum_{jk mu nu nu'} Gamma_jk <nu|L_k|nu'> A_mu,nu L_j A_mu,nu'^dag

    with ``nu`` running over the eigenbasis of the B-marginal of ``w``.
    """
    d_a, d_b = w.dims
    basis_a, basis_b = standard_basis(d_a), standard_basis(d_b)
    gamma = correlation_matrix(w, basis_a, basis_b)
    _, vecs = _env_decomposition(w.rho_b)
    blocks = system_blocks(u, w.dims, vecs)
    out = np.zeros((d_a, d_a), dtype=complex)
    for j, k in zip(*np.nonzero(np.abs(gamma) > 0)):
        lk = dagger(vecs) @ basis_b[k] @ vecs
        lj = basis_a[j]
        for m in range(d_b):
            for n in range(d_b):
                for n2 in range(d_b):
                    if lk[n, n2] != 0:
                        out += gamma[j, k] * lk[n, n2] * blocks[m, n] @ lj @ dagger(blocks[m, n2])
    return out


# -- time families -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TimeFamily:
    """``E_t[rho] = Tr_B[U_t (rho (x) xi) U_t^dag]`` with ``U_t = exp(-i H t)``."""

    hamiltonian: np.ndarray
    xi: np.ndarray
    grid: tuple[float, ...] = ()

    def __post_init__(self):
        h = as_matrix(self.hamiltonian)
        xi = density_matrix(self.xi)
        d_b = xi.shape[0]
        if h.shape[0] % d_b or h.shape[0] != h.shape[1]:
            raise DimensionError("Hamiltonian dimension incompatible with environment")
        hermitian_eig(h)  # validates Hermiticity
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "grid", tuple(float(t) for t in self.grid))

    @property
    def dims(self) -> tuple[int, int]:
        d_b = self.xi.shape[0]
        return (self.hamiltonian.shape[0] // d_b, d_b)

    def unitary(self, t: float) -> np.ndarray:
        return expm_hermitian(self.hamiltonian, t)

    def map_at(self, t: float) -> QuantumMap:
        if t < 0:
            raise ValueError("time must be nonnegative")
        return reduced_map(self.unitary(t), self.xi, self.dims)

    __call__ = map_at


def family_at(tf: TimeFamily, t: float) -> QuantumMap:
    return tf.map_at(t)


def intermediate_map(
    e1: QuantumMap, e2: QuantumMap, label=None, max_condition: float = INVERTIBLE_CONDITION
) -> QuantumMap:
    """``e2 o e1^-1``: the evolution from the first time to the second."""
    return compose(e2, inverse(e1, max_condition=max_condition, label=label))


class SemigroupVerdict(NamedTuple):
    t: float
    s: float
    deviation: float
    holds: bool


def semigroup_check(
    family: Callable[[float], QuantumMap], pairs: Sequence[tuple[float, float]], tol: float = 1e-9
) -> list[SemigroupVerdict]:
    """Compare ``E_{t+s}`` with ``E_t o E_s`` for each pair."""
    out = []
    for t, s in pairs:
        dev = family(t + s).distance(compose(family(t), family(s)))
        out.append(SemigroupVerdict(float(t), float(s), dev, dev <= tol))
    return out


# -- positivity domains ----------------------------------------------------------


@dataclass(frozen=True)
class PositivityReport:
    tested: int
    violating: int
    worst_eigenvalue: float
    witnesses: list = field(default_factory=list, repr=False)
    seed: int | None = None


def positivity_scan(
    m: QuantumMap, inputs: Sequence, tol: float = CP_TOL, seed: int | None = None, max_witnesses: int = 10
) -> PositivityReport:
    """Count the inputs whose image has an eigenvalue below ``-tol``.

    ``seed`` is only recorded; pass the states drawn with it as ``inputs``.
    """
    violating, worst, witnesses = 0, np.inf, []
    for rho in inputs:
        lam = min_eigenvalue(m.apply(rho))
        worst = min(worst, lam)
        if lam < -tol:
            violating += 1
            if len(witnesses) < max_witnesses:
                witnesses.append(np.asarray(rho))
    return PositivityReport(len(inputs), violating, float(worst), witnesses, seed)


def preimage_scan(e1: QuantumMap, inputs: Sequence, tol: float = CP_TOL, seed: int | None = None) -> PositivityReport:
    """Which inputs lie outside ``e1[S(H)]``.

    For invertible ``e1`` a state belongs to the image of the state space
    exactly when ``e1^-1`` maps it to a positive operator; those are the
    states on which an intermediate map ``e2 o e1^-1`` is physically realized.
    """
    return positivity_scan(inverse(e1, max_condition=INVERTIBLE_CONDITION), inputs, tol, seed)


class UnitaryImageResult(NamedTuple):
    unitary_like: bool
    choi_rank: int
    witness: np.ndarray | None
    witness_purity: float | None
    seed: int


def unitary_image_test(
    m: QuantumMap, samples: int = 100, tol: float = 1e-9, seed: int = 0
) -> UnitaryImageResult:
    """Probe whether a channel maps pure states onto pure states.

    A CPTP map with ``E[S] = S`` is unitary, so purity is checked on random
    pure inputs and the verdict cross-checked against the Choi rank.
    """
    verdict = is_cp(m, tol)
    if not verdict.is_cp or not m.is_trace_preserving(tol):
        raise NotCPTPError("unitary-image test requires a CPTP map")
    witness, worst = None, np.inf
    for psi in random_states(m.dim_in, samples, seed, kind="pure"):
        p = purity(m.apply(psi))
        if p < worst:
            worst, witness = p, psi
    eigs = m.choi_spectrum()
    rank = int(np.sum(eigs > 1e-8 * max(eigs[-1], 1.0)))
    if worst >= 1 - tol:
        return UnitaryImageResult(True, rank, None, None, seed)
    return UnitaryImageResult(False, rank, witness, float(worst), seed)


# -- stock dilations ----------------------------------------------------------------


def depolarizing_dilation(x: float) -> tuple[np.ndarray, np.ndarray]:
    """(U, xi) on qubit (x) 4-level environment realizing ``depolarizing(x)``.

    The environment picks Pauli ``k`` with probability ``p_k``; requires
    ``-1/3 <= x <= 1``.
    """
    if not -1 / 3 - 1e-12 <= x <= 1 + 1e-12:
        raise ValueError("depolarizing(x) has a unitary dilation only for -1/3 <= x <= 1")
    p = np.clip(np.array([(1 + 3 * x) / 4] + [(1 - x) / 4] * 3), 0, None)
    paulis = (I2,) + PAULIS
    u = sum(np.kron(s, np.diag(np.eye(4)[k]).astype(complex)) for k, s in enumerate(paulis))
    return u, np.diag(p).astype(complex)
