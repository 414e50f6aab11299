"""Linear maps on operators and their representations.

A :class:`QuantumMap` stores the superoperator acting on column-stacked
operators together with the (unnormalized) Choi matrix

    C = sum_ij |i><j| (x) E[|i><j|],

so a trace-preserving qubit map has ``Tr C = 2``. Kraus operator ``A``
contributes ``conj(A) (x) A`` to the superoperator.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionError, NonInvertibleMapError, NotHermitianError, SingularMatrixError
from .linalg import (
    HERMITIAN_TOL,
    SINGULAR_CONDITION,
    as_matrix,
    dagger,
    hermitian_eig,
    hermiticity_deviation,
    partial_trace,
    solve_linear,
    swap_operator,
    unvec,
    vec,
)
from .states import I2, PAULI_X, PAULI_Y, PAULI_Z, PAULIS

CP_TOL = 1e-9
ZERO_EIG_TOL = 1e-10


def superop_to_choi(superop, dim_in: int, dim_out: int) -> np.ndarray:
    # S[a + b*d', i + j*d] = E[|i><j|]_ab  and  C[i*d' + a, j*d' + b] = E[|i><j|]_ab
    s4 = np.asarray(superop).reshape(dim_out, dim_out, dim_in, dim_in)  # [b, a, j, i]
    return s4.transpose(3, 1, 2, 0).reshape(dim_in * dim_out, dim_in * dim_out)


def choi_to_superop(choi, dim_in: int, dim_out: int) -> np.ndarray:
    c4 = np.asarray(choi).reshape(dim_in, dim_out, dim_in, dim_out)  # [i, a, j, b]
    return c4.transpose(3, 1, 2, 0).reshape(dim_out * dim_out, dim_in * dim_in)


@dataclass(frozen=True, eq=False)
class QuantumMap:
    """A linear map from d_in x d_in to d_out x d_out operators."""

    dim_in: int
    dim_out: int
    superop: np.ndarray
    choi: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        s = as_matrix(self.superop)
        if s.shape != (self.dim_out**2, self.dim_in**2):
            raise DimensionError(
                f"superoperator shape {s.shape} does not match dims {self.dim_in}->{self.dim_out}"
            )
        s = s.copy()
        s.setflags(write=False)
        c = superop_to_choi(s, self.dim_in, self.dim_out).copy()
        c.setflags(write=False)
        object.__setattr__(self, "superop", s)
        object.__setattr__(self, "choi", c)

    @classmethod
    def from_choi(cls, choi, dim_in: int, dim_out: int | None = None) -> "QuantumMap":
        dim_out = dim_in if dim_out is None else dim_out
        return cls(dim_in, dim_out, choi_to_superop(as_matrix(choi), dim_in, dim_out))

    def apply(self, rho) -> np.ndarray:
        rho = as_matrix(rho)
        if rho.shape != (self.dim_in, self.dim_in):
            raise DimensionError(f"input of shape {rho.shape}, map expects d={self.dim_in}")
        return unvec(self.superop @ vec(rho), (self.dim_out, self.dim_out))

    __call__ = apply

    def choi_spectrum(self) -> np.ndarray:
        return hermitian_eig(self.choi).eigenvalues

    def tp_deviation(self) -> float:
        """max |Tr_out C - I|; zero for trace-preserving maps."""
        red = partial_trace(self.choi, (self.dim_in, self.dim_out), keep="A")
        return float(np.max(np.abs(red - np.eye(self.dim_in))))

    def hermiticity_deviation(self) -> float:
        return hermiticity_deviation(self.choi)

    def is_trace_preserving(self, tol: float = 1e-9) -> bool:
        return self.tp_deviation() <= tol

    def is_hermiticity_preserving(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermiticity_deviation() <= tol

    def distance(self, other: "QuantumMap") -> float:
        """Max-abs difference of the superoperators."""
        if (self.dim_in, self.dim_out) != (other.dim_in, other.dim_out):
            raise DimensionError("maps have different dimensions")
        return float(np.max(np.abs(self.superop - other.superop)))

    def __add__(self, other: "QuantumMap") -> "QuantumMap":
        return QuantumMap(self.dim_in, self.dim_out, self.superop + other.superop)

    def __sub__(self, other: "QuantumMap") -> "QuantumMap":
        return QuantumMap(self.dim_in, self.dim_out, self.superop - other.superop)

    def __rmul__(self, scalar: float) -> "QuantumMap":
        return QuantumMap(self.dim_in, self.dim_out, scalar * self.superop)

    def __matmul__(self, other: "QuantumMap") -> "QuantumMap":
        return compose(self, other)


def from_kraus(ops: Sequence, signs: Sequence[float] | None = None) -> QuantumMap:
    """Map ``rho -> sum_j s_j A_j rho A_j^dag`` (all ``s_j = +1`` by default)."""
    ops = [as_matrix(a) for a in ops]
    if not ops:
        raise ValueError("Kraus list is empty")
    shape = ops[0].shape
    if any(a.shape != shape for a in ops):
        raise DimensionError("Kraus operators have inconsistent shapes")
    signs = [1.0] * len(ops) if signs is None else list(signs)
    if len(signs) != len(ops):
        raise ValueError("one sign per Kraus operator required")
    d_out, d_in = shape
    superop = sum(s * np.kron(a.conj(), a) for s, a in zip(signs, ops))
    return QuantumMap(d_in, d_out, superop)


class CPVerdict(NamedTuple):
    is_cp: bool
    min_eigenvalue: float


def is_cp(m: QuantumMap, tol: float = CP_TOL) -> CPVerdict:
    """Choi criterion: CP iff the Choi matrix is positive semidefinite."""
    dev = m.hermiticity_deviation()
    if dev > HERMITIAN_TOL:
        raise NotHermitianError(dev, "Choi matrix (map is not Hermiticity-preserving)")
    lam = float(m.choi_spectrum()[0])
    return CPVerdict(lam >= -tol, lam)


def compose(f: QuantumMap, g: QuantumMap) -> QuantumMap:
    """``f o g`` (apply g first)."""
    if g.dim_out != f.dim_in:
        raise DimensionError(f"cannot compose: g outputs d={g.dim_out}, f expects d={f.dim_in}")
    return QuantumMap(g.dim_in, f.dim_out, f.superop @ g.superop)


def inverse(m: QuantumMap, max_condition: float = SINGULAR_CONDITION, label=None) -> QuantumMap:
    """Mathematical inverse of ``m`` (generally not a physical map)."""
    if m.dim_in != m.dim_out:
        raise DimensionError("only maps with equal input/output dimension can be inverted")
    try:
        inv = solve_linear(m.superop, np.eye(m.dim_in**2), max_condition=max_condition)
    except SingularMatrixError as exc:
        raise NonInvertibleMapError(exc.condition, label) from None
    return QuantumMap(m.dim_in, m.dim_out, inv)


# -- difference-of-CP decomposition ------------------------------------------


@dataclass(frozen=True, eq=False)
class KrausSet:
    operators: tuple[np.ndarray, ...]
    signs: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.operators)

    def to_map(self, dim_in: int, dim_out: int) -> QuantumMap:
        if not self.operators:
            return QuantumMap(dim_in, dim_out, np.zeros((dim_out**2, dim_in**2)))
        return from_kraus(self.operators, self.signs)

    def effect(self, dim_in: int) -> np.ndarray:
        """``sum_j s_j A_j^dag A_j``."""
        out = np.zeros((dim_in, dim_in), dtype=complex)
        for s, a in zip(self.signs, self.operators):
            out += s * dagger(a) @ a
        return out


@dataclass(frozen=True, eq=False)
class NcpDecomposition:
    """``E = sum_{j<=q} A_j . A_j^dag - sum_{j>q} A_j . A_j^dag``."""

    dim_in: int
    dim_out: int
    positive: KrausSet
    negative: KrausSet

    @property
    def q(self) -> int:
        return len(self.positive)

    @property
    def operators(self) -> list[np.ndarray]:
        return list(self.positive.operators) + list(self.negative.operators)

    def to_map(self) -> QuantumMap:
        return self.positive.to_map(self.dim_in, self.dim_out) + self.negative.to_map(
            self.dim_in, self.dim_out
        )

    def trace_identity(self) -> np.ndarray:
        """``sum_+ A^dag A - sum_- A^dag A`` (identity for trace-preserving maps)."""
        return self.positive.effect(self.dim_in) + self.negative.effect(self.dim_in)

    def orthogonality_defect(self) -> float:
        ops = self.operators
        if len(ops) < 2:
            return 0.0
        g = np.array([[np.trace(dagger(a) @ b) for b in ops] for a in ops])
        return float(np.max(np.abs(g - np.diag(np.diag(g)))))


def ncp_decompose(m: QuantumMap, zero_tol: float = ZERO_EIG_TOL) -> NcpDecomposition:
    """Split a Hermiticity-preserving map into a difference of two CP maps.

    Kraus operators come from the Choi eigenvectors, scaled by sqrt|lambda|,
    so they are mutually orthogonal in the Hilbert-Schmidt inner product.
    """
    w, v = hermitian_eig(m.choi)
    pos, neg = [], []
    for lam, col in zip(w, v.T):
        if abs(lam) <= zero_tol:
            continue
        a = np.sqrt(abs(lam)) * col.reshape(m.dim_in, m.dim_out).T
        (pos if lam > 0 else neg).append(a)
    return NcpDecomposition(
        m.dim_in,
        m.dim_out,
        KrausSet(tuple(pos[::-1]), (1.0,) * len(pos)),
        KrausSet(tuple(neg), (-1.0,) * len(neg)),
    )


# -- named maps -------------------------------------------------------------------


def identity(d: int) -> QuantumMap:
    return QuantumMap(d, d, np.eye(d * d))


def unitary_map(u) -> QuantumMap:
    return from_kraus([u])


def swap_unitary(d: int) -> np.ndarray:
    return swap_operator(d, d)


def depolarizing(x: float) -> QuantumMap:
    """Qubit map contracting the Bloch vector by ``x``: ``r -> x r``.

    CP exactly for ``x`` in [-1/3, 1].
    """
    x = float(x)
    return (x * identity(2)) + ((1 - x) * replacement_map(I2 / 2, 2))


def not_map() -> QuantumMap:
    """``rho -> (X rho X + Y rho Y + Z rho Z - rho) / 2``; equals depolarizing(-1)."""
    return from_kraus([PAULI_X, PAULI_Y, PAULI_Z, I2], [0.5, 0.5, 0.5, -0.5])


def transpose_map(d: int) -> QuantumMap:
    s = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            s[j + i * d, i + j * d] = 1.0
    return QuantumMap(d, d, s)


def replacement_map(sigma, d_in: int) -> QuantumMap:
    """``rho -> Tr(rho) sigma`` (complete contraction onto ``sigma``)."""
    sigma = as_matrix(sigma)
    return QuantumMap(d_in, sigma.shape[0], np.outer(vec(sigma), vec(np.eye(d_in))))


def phase_damping(p: float = 1.0) -> QuantumMap:
    """``rho -> (1 - p/2) rho + (p/2) Z rho Z``; p=1 kills coherences."""
    return from_kraus([np.sqrt(1 - p / 2) * I2, np.sqrt(p / 2) * PAULI_Z])


def bloch_affine(m: QuantumMap) -> tuple[np.ndarray, np.ndarray]:
    """Qubit map as ``r -> M r + t`` (exact for trace-preserving maps)."""
    if (m.dim_in, m.dim_out) != (2, 2):
        raise DimensionError("Bloch representation needs a qubit map")
    mat = np.array([[np.trace(si @ m.apply(sj)).real / 2 for sj in PAULIS] for si in PAULIS])
    t = np.array([np.trace(si @ m.apply(I2)).real / 2 for si in PAULIS])
    return mat, t


def kraus_from_cp(m: QuantumMap, tol: float = CP_TOL) -> list[np.ndarray]:
    """Kraus operators of a CP map (canonical, from the Choi eigenvectors)."""
    verdict = is_cp(m, tol)
    if not verdict.is_cp:
        raise ValueError(f"map is not CP (min Choi eigenvalue {verdict.min_eigenvalue:.3e})")
    return list(ncp_decompose(m).positive.operators)
