"""Dense complex linear algebra used throughout the package.

Matrices are plain complex128 numpy arrays. Bipartite operators use the
Kronecker convention: the joint row index is ``i_A * d_B + i_B``.
Vectorization is column stacking (``vec(X) = X.flatten(order="F")``).
"""
from __future__ import annotations

from functools import reduce
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, NotHermitianError, SingularMatrixError

HERMITIAN_TOL = 1e-10
SINGULAR_CONDITION = 1e12


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def tensor(*factors) -> np.ndarray:
    """Kronecker product of one or more matrices (left factor is slowest)."""
    if not factors:
        raise ValueError("tensor() needs at least one factor")
    return reduce(np.kron, (as_matrix(f) for f in factors))


def partial_trace(m, dims: tuple[int, int], keep: str = "A") -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    ``keep="A"`` returns Tr_B(m), ``keep="B"`` returns Tr_A(m).
    """
    d_a, d_b = dims
    m = as_matrix(m)
    if m.shape != (d_a * d_b, d_a * d_b):
        raise DimensionError(f"operator of shape {m.shape} does not match dims {dims}")
    t = m.reshape(d_a, d_b, d_a, d_b)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def hermiticity_deviation(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - dagger(m)))) if m.size else 0.0


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_deviation(m) <= tol


class HermitianEig(NamedTuple):
    eigenvalues: np.ndarray  # ascending, real
    eigenvectors: np.ndarray  # orthonormal columns


def hermitian_eig(m, tol: float = HERMITIAN_TOL) -> HermitianEig:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"hermitian_eig needs a square matrix, got {m.shape}")
    dev = hermiticity_deviation(m)
    if dev > tol:
        raise NotHermitianError(dev)
    w, v = np.linalg.eigh((m + dagger(m)) / 2)
    return HermitianEig(w, v)


def condition_number(a) -> float:
    """2-norm condition number; ``inf`` for exactly singular input."""
    s = np.linalg.svd(as_matrix(a), compute_uv=False)
    if s.size == 0 or s[-1] == 0.0:
        return float("inf")
    return float(s[0] / s[-1])


def solve_linear(a, b, max_condition: float = SINGULAR_CONDITION) -> np.ndarray:
    """Solve ``a @ x = b``; refuse when ``a`` is numerically singular."""
    a = as_matrix(a)
    b = np.asarray(b, dtype=complex)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"solve_linear needs a square matrix, got {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise DimensionError(f"right-hand side has {b.shape[0]} rows, expected {a.shape[0]}")
    cond = condition_number(a)
    if not cond < max_condition:
        raise SingularMatrixError(cond)
    return np.linalg.solve(a, b)


def vec(m) -> np.ndarray:
    return np.asarray(m).reshape(-1, order="F")


def unvec(v, shape: tuple[int, int]) -> np.ndarray:
    return np.asarray(v).reshape(shape, order="F")


def ket_bra(i: int, j: int, d: int) -> np.ndarray:
    e = np.zeros((d, d), dtype=complex)
    e[i, j] = 1.0
    return e


def swap_operator(d_a: int, d_b: int | None = None) -> np.ndarray:
    """Permutation ``|a>|b> -> |b>|a>`` from H_A (x) H_B to H_B (x) H_A."""
    d_b = d_a if d_b is None else d_b
    s = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
    for a in range(d_a):
        for b in range(d_b):
            s[b * d_a + a, a * d_b + b] = 1.0
    return s


def reshuffle(u, dims: tuple[int, int]) -> np.ndarray:
    """Realign a bipartite operator into a d_A^2 x d_B^2 matrix.

    ``R[(i_A, j_A), (i_B, j_B)] = U[(i_A, i_B), (j_A, j_B)]``; the singular
    values of R are the operator-Schmidt coefficients of U.
    """
    d_a, d_b = dims
    u = as_matrix(u)
    if u.shape != (d_a * d_b, d_a * d_b):
        raise DimensionError(f"operator of shape {u.shape} does not match dims {dims}")
    return u.reshape(d_a, d_b, d_a, d_b).transpose(0, 2, 1, 3).reshape(d_a * d_a, d_b * d_b)


def operator_schmidt_rank(u, dims: tuple[int, int], rel_tol: float = 1e-8) -> int:
    s = np.linalg.svd(reshuffle(u, dims), compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def unitarity_deviation(u) -> float:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return float("inf")
    return float(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))))


def expm_hermitian(h, t: float) -> np.ndarray:
    """``exp(-i h t)`` for Hermitian ``h`` through its eigendecomposition."""
    w, v = hermitian_eig(h)
    return (v * np.exp(-1j * w * t)) @ dagger(v)
