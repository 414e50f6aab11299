"""Density matrices, Hermitian operator bases and bipartite correlations.

A joint state is decomposed as

    omega = rho_A (x) rho_B + sum_jk Gamma_jk L_j^A (x) L_k^B

with ``{L_j}`` an orthonormal Hermitian basis whose first element is
``I / sqrt(d)``; row and column 0 of Gamma are therefore zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError, NotAStateError
from .linalg import (
    HERMITIAN_TOL,
    as_matrix,
    dagger,
    hermiticity_deviation,
    partial_trace,
    tensor,
)

STATE_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


def density_matrix(m, tol: float = STATE_TOL) -> np.ndarray:
    """Validate ``m`` as a density matrix and return a cleaned copy.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero and the result is
    renormalized; anything more negative is rejected.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"density matrix must be square, got {m.shape}")
    dev = hermiticity_deviation(m)
    if dev > tol:
        raise NotAStateError(f"operator is not Hermitian (deviation {dev:.3e})")
    m = (m + dagger(m)) / 2
    tr = np.trace(m).real
    if abs(tr - 1.0) > tol:
        raise NotAStateError(f"trace is {tr:.12g}, expected 1")
    w, v = np.linalg.eigh(m)
    if w[0] < -tol:
        raise NotAStateError(f"operator has negative eigenvalue {w[0]:.3e}", w[0])
    if w[0] < 0:
        w = np.clip(w, 0.0, None)
        m = (v * w) @ dagger(v)
        m = m / np.trace(m).real
    return m


def is_state(m, tol: float = STATE_TOL) -> bool:
    try:
        density_matrix(m, tol)
    except (NotAStateError, DimensionError):
        return False
    return True


def min_eigenvalue(m) -> float:
    m = as_matrix(m)
    return float(np.linalg.eigvalsh((m + dagger(m)) / 2)[0])


def purity(rho) -> float:
    rho = as_matrix(rho)
    return float(np.real(np.trace(rho @ rho)))


def pure_state(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def maximally_mixed(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex) / d


# -- operator bases ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OperatorBasis:
    """Orthonormal Hermitian basis, ``Tr(L_j L_k) = delta_jk``."""

    dim: int
    elements: np.ndarray  # shape (d^2, d, d)

    def __len__(self) -> int:
        return self.elements.shape[0]

    def __getitem__(self, j: int) -> np.ndarray:
        return self.elements[j]

    def coefficients(self, op) -> np.ndarray:
        """Expansion coefficients ``Tr(L_j op)`` (real for Hermitian ``op``)."""
        op = as_matrix(op)
        return np.einsum("jab,ba->j", self.elements, op)

    def expand(self, coeffs) -> np.ndarray:
        return np.einsum("j,jab->ab", np.asarray(coeffs), self.elements)

    def gram(self) -> np.ndarray:
        return np.einsum("jab,kba->jk", self.elements, self.elements)


@lru_cache(maxsize=None)
def _gell_mann(d: int) -> np.ndarray:
    els = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            sym = np.zeros((d, d), dtype=complex)
            sym[j, k] = sym[k, j] = 1 / np.sqrt(2)
            anti = np.zeros((d, d), dtype=complex)
            anti[j, k] = -1j / np.sqrt(2)
            anti[k, j] = 1j / np.sqrt(2)
            els += [sym, anti]
    for l in range(1, d):
        diag = np.zeros(d, dtype=complex)
        diag[:l] = 1.0
        diag[l] = -l
        els.append(np.diag(diag) / np.sqrt(l * (l + 1)))
    arr = np.array(els)
    arr.setflags(write=False)
    return arr


def standard_basis(d: int) -> OperatorBasis:
    """Generalized Gell-Mann basis normalized to ``Tr(L_j L_k) = delta_jk``.

    Element 0 is ``I/sqrt(d)``. For d=2 the order is I, X, Y, Z (each /sqrt 2).
    """
    if int(d) != d or d < 2:
        raise ValueError(f"basis dimension must be an integer >= 2, got {d}")
    return OperatorBasis(int(d), _gell_mann(int(d)))


# -- qubit Bloch representation ----------------------------------------------


def bloch_to_state(r, tol: float = STATE_TOL) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise DimensionError(f"Bloch vector must have 3 components, got {r.shape}")
    norm = np.linalg.norm(r)
    if norm > 1 + tol:
        raise NotAStateError(f"Bloch vector length {norm:.12g} exceeds 1")
    return 0.5 * (I2 + r[0] * PAULI_X + r[1] * PAULI_Y + r[2] * PAULI_Z)


def bloch_vector(rho) -> np.ndarray:
    """Components ``Tr(rho sigma_i)``; defined for any 2x2 operator."""
    rho = as_matrix(rho)
    if rho.shape != (2, 2):
        raise DimensionError(f"Bloch vector needs a 2x2 operator, got {rho.shape}")
    return np.array([np.trace(rho @ s).real for s in PAULIS])


def direction_state(n) -> np.ndarray:
    """Pure qubit state pointing along the (normalized) direction ``n``."""
    n = np.asarray(n, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0:
        raise ValueError("direction must be nonzero")
    return bloch_to_state(n / norm)


# -- bipartite states -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BipartiteState:
    joint: np.ndarray
    dim_a: int
    dim_b: int

    def __post_init__(self):
        if self.dim_a < 1 or self.dim_b < 1:
            raise DimensionError("subsystem dimensions must be positive")
        joint = as_matrix(self.joint)
        n = self.dim_a * self.dim_b
        if joint.shape != (n, n):
            raise DimensionError(
                f"joint state of shape {joint.shape} does not match {self.dim_a}x{self.dim_b}"
            )
        object.__setattr__(self, "joint", density_matrix(joint))

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_a, self.dim_b)

    @property
    def rho_a(self) -> np.ndarray:
        return partial_trace(self.joint, self.dims, keep="A")

    @property
    def rho_b(self) -> np.ndarray:
        return partial_trace(self.joint, self.dims, keep="B")

    @classmethod
    def product(cls, rho_a, rho_b) -> "BipartiteState":
        rho_a, rho_b = as_matrix(rho_a), as_matrix(rho_b)
        return cls(tensor(rho_a, rho_b), rho_a.shape[0], rho_b.shape[0])


def singlet() -> BipartiteState:
    psi = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    return BipartiteState(pure_state(psi), 2, 2)


def _bases(dims, basis_a, basis_b):
    basis_a = basis_a or standard_basis(dims[0])
    basis_b = basis_b or standard_basis(dims[1])
    if basis_a.dim != dims[0] or basis_b.dim != dims[1]:
        raise DimensionError(
            f"bases of dims ({basis_a.dim}, {basis_b.dim}) do not match state dims {dims}"
        )
    return basis_a, basis_b


def correlation_matrix(
    w: BipartiteState,
    basis_a: OperatorBasis | None = None,
    basis_b: OperatorBasis | None = None,
) -> np.ndarray:
    """Gamma_jk = <L_j (x) L_k> - <L_j><L_k>, a real d_A^2 x d_B^2 matrix."""
    basis_a, basis_b = _bases(w.dims, basis_a, basis_b)
    d_a, d_b = w.dims
    t = w.joint.reshape(d_a, d_b, d_a, d_b)
    joint = np.einsum("jpq,krs,qspr->jk", basis_a.elements, basis_b.elements, t)
    local = np.outer(basis_a.coefficients(w.rho_a), basis_b.coefficients(w.rho_b))
    gamma = joint - local
    if np.max(np.abs(gamma.imag)) > HERMITIAN_TOL:
        raise ValueError("correlation matrix has imaginary entries; joint not Hermitian")
    gamma = gamma.real
    gamma[0, :] = 0.0
    gamma[:, 0] = 0.0
    return gamma


def correlation_operator(gamma, basis_a: OperatorBasis, basis_b: OperatorBasis) -> np.ndarray:
    """The traceless correlation part ``sum_jk Gamma_jk L_j (x) L_k``."""
    gamma = np.asarray(gamma)
    d = basis_a.dim * basis_b.dim
    out = np.zeros((d, d), dtype=complex)
    for j, k in zip(*np.nonzero(gamma)):
        out += gamma[j, k] * np.kron(basis_a[j], basis_b[k])
    return out


def assemble_bipartite(
    rho_a,
    rho_b,
    gamma,
    basis_a: OperatorBasis | None = None,
    basis_b: OperatorBasis | None = None,
    psd_tol: float = 1e-8,
) -> BipartiteState:
    """Build ``rho_A (x) rho_B + sum Gamma_jk L_j (x) L_k`` as a joint state.

    Raises NotAStateError when Gamma is incompatible with the marginals.
    """
    rho_a, rho_b = density_matrix(rho_a), density_matrix(rho_b)
    dims = (rho_a.shape[0], rho_b.shape[0])
    basis_a, basis_b = _bases(dims, basis_a, basis_b)
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (dims[0] ** 2, dims[1] ** 2):
        raise DimensionError(f"Gamma shape {gamma.shape} does not match dims {dims}")
    if np.max(np.abs(gamma[0, :])) > HERMITIAN_TOL or np.max(np.abs(gamma[:, 0])) > HERMITIAN_TOL:
        raise ValueError("Gamma row/column 0 must vanish")
    joint = tensor(rho_a, rho_b) + correlation_operator(gamma, basis_a, basis_b)
    lam = min_eigenvalue(joint)
    if lam < -psd_tol:
        raise NotAStateError(
            f"Gamma incompatible with marginals: joint operator has eigenvalue {lam:.6g}", lam
        )
    return BipartiteState(density_matrix(joint, tol=max(psd_tol, STATE_TOL)), *dims)
