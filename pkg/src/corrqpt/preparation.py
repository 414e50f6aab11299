"""Preparators: rules that turn a requested system state into a joint
system-environment state whose A-marginal is that system state.

Four kinds are provided:

* :class:`Factorized`: ``rho -> rho (x) xi`` with a fixed environment.
* :class:`SwapTarget`: ``rho_in -> rho_in (x) rho_out``; followed by a SWAP
  this realizes any assignment ``rho_in -> rho_out``.
* :class:`SingletPostselect`: Stern-Gerlach postselection on one half of a
  singlet; the partner spin is left in the orthogonal state.
* :class:`PreparingOps`: a fixed (possibly correlated) state ``omega``
  processed on the system side by CPTP preparing operations.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .channels import QuantumMap, is_cp
from .errors import DimensionError, NotCPTPError, NotUnitaryError
from .linalg import as_matrix, operator_schmidt_rank, partial_trace, swap_operator, tensor, unitarity_deviation
from .states import (
    BipartiteState,
    OperatorBasis,
    correlation_matrix,
    density_matrix,
    direction_state,
    maximally_mixed,
    singlet,
    standard_basis,
)

MARGINAL_TOL = 1e-9

POSTSELECTION_DIRECTIONS = ((0, 0, 1), (0, 0, -1), (1, 0, 0), (0, 1, 0))


def qubit_tomography_states() -> list[np.ndarray]:
    """|0>, |1>, |+>, |+i>: a spanning set for qubit operators."""
    return [direction_state(n) for n in POSTSELECTION_DIRECTIONS]


class Preparator:
    """Common interface; subclasses define ``prepare`` and the request domain."""

    dim_a: int
    dim_b: int

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_a, self.dim_b)

    def prepare(self, request) -> BipartiteState:
        raise NotImplementedError

    def input_state(self, request) -> np.ndarray:
        """System state the experimenter believes was prepared (the A-marginal)."""
        return self.prepare(request).rho_a

    def default_requests(self) -> list:
        raise NotImplementedError

    def reference_environment(self) -> np.ndarray | None:
        """Environment state independent of the request, if there is one."""
        return None


@dataclass(frozen=True, eq=False)
class Factorized(Preparator):
    xi: np.ndarray
    dim_a: int = 2

    def __post_init__(self):
        xi = density_matrix(self.xi)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "dim_b", xi.shape[0])

    def prepare(self, request) -> BipartiteState:
        rho = density_matrix(request)
        if rho.shape[0] != self.dim_a:
            raise DimensionError(f"request has d={rho.shape[0]}, preparator expects {self.dim_a}")
        return BipartiteState.product(rho, self.xi)

    def default_requests(self) -> list:
        if self.dim_a != 2:
            raise DimensionError("default requests only defined for qubits")
        return qubit_tomography_states()

    def reference_environment(self) -> np.ndarray:
        return self.xi


@dataclass(frozen=True, eq=False)
class SwapTarget(Preparator):
    """``rho_in -> rho_in (x) rho_out``.

    ``target`` is either a fixed output state or a callable producing the
    desired output for each input (one preparator per assignment, bundled).
    """

    target: np.ndarray | Callable[[np.ndarray], np.ndarray]
    dim_a: int = 2

    def __post_init__(self):
        if callable(self.target):
            object.__setattr__(self, "dim_b", self.dim_a)
        else:
            t = density_matrix(self.target)
            object.__setattr__(self, "target", t)
            object.__setattr__(self, "dim_b", t.shape[0])

    def output_for(self, rho_in: np.ndarray) -> np.ndarray:
        if callable(self.target):
            return density_matrix(self.target(rho_in))
        return self.target

    def prepare(self, request) -> BipartiteState:
        rho = density_matrix(request)
        if rho.shape[0] != self.dim_a:
            raise DimensionError(f"request has d={rho.shape[0]}, preparator expects {self.dim_a}")
        return BipartiteState.product(rho, self.output_for(rho))

    def default_requests(self) -> list:
        if self.dim_a != 2:
            raise DimensionError("default requests only defined for qubits")
        return qubit_tomography_states()

    def reference_environment(self) -> np.ndarray | None:
        return None if callable(self.target) else self.target


@dataclass(frozen=True, eq=False)
class SingletPostselect(Preparator):
    """Postselect spin A of a singlet along ``n``; spin B collapses to ``-n``.

    Requests are Bloch directions (3-vectors); only pure states are produced.
    """

    dim_a: int = field(default=2, init=False)
    dim_b: int = field(default=2, init=False)

    def prepare(self, request) -> BipartiteState:
        n = np.asarray(request, dtype=float)
        if n.shape != (3,):
            raise DimensionError("singlet postselection expects a Bloch direction (3-vector)")
        return BipartiteState.product(direction_state(n), direction_state(-n))

    def default_requests(self) -> list:
        return [np.array(n, dtype=float) for n in POSTSELECTION_DIRECTIONS]

    def reference_environment(self) -> np.ndarray:
        # partner spin before the postselection outcome is read
        return maximally_mixed(2)


def postselection_mixture(directions: Sequence, weights: Sequence[float]) -> BipartiteState:
    """Convex mixture of singlet postselections (mixed-state preparation)."""
    weights = np.asarray(weights, dtype=float)
    if len(weights) != len(directions) or np.any(weights < 0) or not np.isclose(weights.sum(), 1):
        raise ValueError("weights must be a probability vector matching directions")
    p = SingletPostselect()
    joint = sum(w * p.prepare(n).joint for w, n in zip(weights, directions))
    return BipartiteState(joint, 2, 2)


def apply_local(m: QuantumMap, joint, dims: tuple[int, int]) -> np.ndarray:
    """``(m (x) id)[joint]`` for a map acting on the A factor."""
    d_a, d_b = dims
    if m.dim_in != d_a:
        raise DimensionError(f"map expects d={m.dim_in}, A factor has d={d_a}")
    t = as_matrix(joint).reshape(d_a, d_b, d_a, d_b)
    d_o = m.dim_out
    out = np.zeros((d_o, d_b, d_o, d_b), dtype=complex)
    for b in range(d_b):
        for bp in range(d_b):
            out[:, b, :, bp] = m.apply(t[:, b, :, bp])
    return out.reshape(d_o * d_b, d_o * d_b)


def validate_cptp(m: QuantumMap, tol: float = 1e-9, what: str = "preparing operation") -> None:
    if m.tp_deviation() > tol:
        raise NotCPTPError(f"{what} is not trace-preserving (deviation {m.tp_deviation():.3e})")
    verdict = is_cp(m, tol)
    if not verdict.is_cp:
        raise NotCPTPError(
            f"{what} is not completely positive (min Choi eigenvalue {verdict.min_eigenvalue:.3e})"
        )


@dataclass(frozen=True, eq=False)
class PreparingOps(Preparator):
    """``Phi_i -> (Phi_i (x) id)[omega]``; requests are indices into ``ops``."""

    omega: BipartiteState
    ops: tuple[QuantumMap, ...]

    def __post_init__(self):
        ops = tuple(self.ops)
        if not ops:
            raise ValueError("at least one preparing operation is required")
        for i, op in enumerate(ops):
            if (op.dim_in, op.dim_out) != (self.omega.dim_a, self.omega.dim_a):
                raise DimensionError(f"preparing operation {i} has wrong dimensions")
            validate_cptp(op, what=f"preparing operation {i}")
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "dim_a", self.omega.dim_a)
        object.__setattr__(self, "dim_b", self.omega.dim_b)

    def prepare(self, request) -> BipartiteState:
        i = int(request)
        if not 0 <= i < len(self.ops):
            raise IndexError(f"preparing-operation index {i} out of range")
        return BipartiteState(apply_local(self.ops[i], self.omega.joint, self.dims), *self.dims)

    def input_state(self, request) -> np.ndarray:
        return self.ops[int(request)].apply(self.omega.rho_a)

    def default_requests(self) -> list:
        return list(range(len(self.ops)))

    def reference_environment(self) -> np.ndarray:
        return self.omega.rho_b


def check_marginal(p: Preparator, request, tol: float = MARGINAL_TOL) -> float:
    """max-abs deviation of Tr_B prepare(request) from the intended system state."""
    w = p.prepare(request)
    if isinstance(p, PreparingOps):
        target = p.ops[int(request)].apply(p.omega.rho_a)
    elif isinstance(p, SingletPostselect):
        target = direction_state(request)
    else:
        target = density_matrix(request)
    return float(np.max(np.abs(w.rho_a - target)))


# -- correlation transform under preparing operations ----------------------------


def preparing_op_matrix(phi: QuantumMap, basis: OperatorBasis | None = None) -> np.ndarray:
    """``Phi_jl = Tr(L_j Phi[L_l])``, the map in the orthonormal Hermitian basis."""
    basis = basis or standard_basis(phi.dim_in)
    cols = [basis.coefficients(phi.apply(el)) for el in basis.elements]
    mat = np.array(cols).T
    return mat.real


class GammaLaw(NamedTuple):
    before: np.ndarray
    after: np.ndarray
    phi: np.ndarray
    deviation: float


def gamma_transform_law(p: PreparingOps, i: int, tol: float = 1e-9) -> GammaLaw:
    """Correlations of ``omega`` and of ``(Phi_i (x) id)[omega]``; checks Gamma' = Phi Gamma."""
    basis_a = standard_basis(p.dim_a)
    basis_b = standard_basis(p.dim_b)
    before = correlation_matrix(p.omega, basis_a, basis_b)
    after = correlation_matrix(p.prepare(i), basis_a, basis_b)
    phi = preparing_op_matrix(p.ops[i], basis_a)
    dev = float(np.max(np.abs(after - phi @ before)))
    if dev > tol:
        raise ArithmeticError(f"Gamma' != Phi Gamma (deviation {dev:.3e})")
    return GammaLaw(before, after, phi, dev)


# -- compatibility of preparator and dynamics -------------------------------------


class Compatibility(enum.Enum):
    GAMMA_ZERO = "CompatibleGammaZero"
    PRODUCT_U = "CompatibleProductU"
    PRODUCT_U_SWAP = "CompatibleProductUSwap"
    INCOMPATIBLE = "Incompatible"

    @property
    def compatible(self) -> bool:
        return self is not Compatibility.INCOMPATIBLE


def _check_unitary(u, n: int, tol: float) -> np.ndarray:
    u = as_matrix(u)
    if u.shape != (n, n):
        raise DimensionError(f"unitary of shape {u.shape}, expected {n}x{n}")
    dev = unitarity_deviation(u)
    if dev > tol:
        raise NotUnitaryError(dev)
    return u


def _product_branch(u, dims, tol) -> Compatibility | None:
    if operator_schmidt_rank(u, dims, tol) == 1:
        return Compatibility.PRODUCT_U
    if dims[0] == dims[1] and operator_schmidt_rank(u @ swap_operator(*dims), dims, tol) == 1:
        return Compatibility.PRODUCT_U_SWAP
    return None


def compatibility_check(w: BipartiteState, u, tol: float = 1e-8) -> Compatibility:
    """Which sufficient condition (if any) makes ``w`` harmless under ``u``.

    Checked in order: vanishing correlations, ``u = U_A (x) U_B``,
    ``u = (U_A (x) U_B) SWAP``.
    """
    u = _check_unitary(u, w.dim_a * w.dim_b, tol)
    if np.max(np.abs(correlation_matrix(w))) <= tol:
        return Compatibility.GAMMA_ZERO
    return _product_branch(u, w.dims, tol) or Compatibility.INCOMPATIBLE


def preparator_compatibility(p: Preparator, u, requests=None, tol: float = 1e-8) -> Compatibility:
    """Compatibility of a preparator over all requests it is used with.

    Extends :func:`compatibility_check` to preparators whose environment
    state depends on the request: unless ``u`` acts locally, such a
    preparator is incompatible even when every prepared state is a product.
    """
    requests = p.default_requests() if requests is None else list(requests)
    states = [p.prepare(r) for r in requests]
    u = _check_unitary(u, p.dim_a * p.dim_b, tol)
    env = [w.rho_b for w in states]
    if any(np.max(np.abs(e - env[0])) > tol for e in env[1:]):
        if operator_schmidt_rank(u, p.dims, tol) == 1:
            return Compatibility.PRODUCT_U
        return Compatibility.INCOMPATIBLE
    if all(np.max(np.abs(correlation_matrix(w))) <= tol for w in states):
        return Compatibility.GAMMA_ZERO
    return _product_branch(u, p.dims, tol) or Compatibility.INCOMPATIBLE
