"""Linear-inversion process tomography and finite-statistics simulation."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .channels import CP_TOL, NcpDecomposition, QuantumMap, ncp_decompose
from .dynamics import DynamicsSetup, effective_transform
from .errors import DimensionError, SpanningError
from .linalg import as_matrix, condition_number, dagger, solve_linear, vec
from .preparation import Compatibility, preparator_compatibility, qubit_tomography_states
from .sampling import child_seeds
from .states import I2, PAULIS, density_matrix

DEFAULT_INPUT_CONDITION = 1e3
SPANNING_CONDITION = 1e8
PAULI_LABELS = ("x", "y", "z")


@dataclass(frozen=True, eq=False)
class Assignment:
    """One measured pair ``input -> output``.

    ``counts`` maps a Pauli label to ``(n_plus, n_minus)``; absent for exact data.
    """

    input: np.ndarray
    output: np.ndarray
    counts: dict | None = None
    shots: int | None = None

    def __post_init__(self):
        if self.counts is not None:
            if self.shots is None:
                raise ValueError("counts given without a shot count")
            for label, tally in self.counts.items():
                if sum(tally) != self.shots or min(tally) < 0:
                    raise ValueError(f"tallies for {label!r} do not sum to {self.shots}")


def design_matrix(states: Sequence) -> np.ndarray:
    return np.array([vec(as_matrix(s)) for s in states]).T


def _spanning_condition(x: np.ndarray) -> float:
    if x.shape[1] < x.shape[0]:
        return float("inf")
    return condition_number(x @ dagger(x)) ** 0.5


def default_inputs(d: int = 2, states: Sequence | None = None) -> list[np.ndarray]:
    """Linearly independent input states for tomography.

    Qubits get |0>, |1>, |+>, |+i>; other dimensions need an explicit list,
    which is validated for spanning.
    """
    if states is None:
        if d != 2:
            raise DimensionError("default inputs exist only for d=2; supply a state list")
        states = qubit_tomography_states()
        limit = DEFAULT_INPUT_CONDITION
    else:
        limit = SPANNING_CONDITION
    states = [density_matrix(s) for s in states]
    if any(s.shape[0] != d for s in states):
        raise DimensionError(f"all input states must have dimension {d}")
    cond = _spanning_condition(design_matrix(states))
    if not cond < limit:
        raise SpanningError(cond)
    return states


@dataclass(frozen=True, eq=False)
class TomographyReport:
    reconstructed: QuantumMap
    choi_spectrum: np.ndarray
    cp_verdict: bool
    tolerance: float
    tp_deviation: float
    herm_deviation: float
    ncp: NcpDecomposition | None
    condition_number: float
    residual: float
    seed: int | None = None
    shot_count: int | None = None

    @property
    def min_choi_eigenvalue(self) -> float:
        return float(self.choi_spectrum[0])


def _clip_to_state(m: np.ndarray) -> np.ndarray:
    m = (m + dagger(m)) / 2
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    out = (v * w) @ dagger(v)
    return out / np.trace(out).real


def linear_inversion(
    assignments: Sequence[Assignment],
    tol: float = CP_TOL,
    seed: int | None = None,
    project_outputs: bool = False,
) -> TomographyReport:
    """Reconstruct the superoperator ``S`` from ``S vec(rho_j) = vec(rho_j')``.

    Exactly d^2 assignments are solved directly, more by least squares.
    Outputs are used as given (no positivity projection) unless
    ``project_outputs`` is set.
    """
    if not assignments:
        raise ValueError("no assignments")
    d_in = assignments[0].input.shape[0]
    d_out = assignments[0].output.shape[0]
    x = design_matrix([a.input for a in assignments])
    outs = [a.output for a in assignments]
    if project_outputs:
        outs = [_clip_to_state(o) for o in outs]
    y = design_matrix(outs)
    if x.shape[0] != d_in**2 or y.shape[0] != d_out**2:
        raise DimensionError("assignments have inconsistent dimensions")
    cond = _spanning_condition(x)
    if not cond < SPANNING_CONDITION:
        raise SpanningError(cond)
    if x.shape[1] == x.shape[0]:
        st = solve_linear(x.T, y.T, max_condition=np.inf)
    else:
        st = solve_linear((x @ dagger(x)).T, (y @ dagger(x)).T, max_condition=np.inf)
    s = st.T
    m = QuantumMap(d_in, d_out, s)
    residual = float(np.max(np.abs(s @ x - y)))
    choi = m.choi
    herm_dev = float(np.max(np.abs(choi - dagger(choi))))
    spectrum = np.linalg.eigvalsh((choi + dagger(choi)) / 2)
    cp = bool(spectrum[0] >= -tol)
    ncp = None if cp else ncp_decompose(QuantumMap.from_choi((choi + dagger(choi)) / 2, d_in, d_out))
    shots = {a.shots for a in assignments if a.shots is not None}
    return TomographyReport(
        reconstructed=m,
        choi_spectrum=spectrum,
        cp_verdict=cp,
        tolerance=tol,
        tp_deviation=m.tp_deviation(),
        herm_deviation=herm_dev,
        ncp=ncp,
        condition_number=cond,
        residual=residual,
        seed=seed,
        shot_count=max(shots) if shots else None,
    )


# -- measurement simulation -------------------------------------------------------


def sample_pauli_counts(rho: np.ndarray, shots: int, rng: np.random.Generator) -> tuple[dict, np.ndarray]:
    """Measure X, Y, Z ``shots`` times each; return tallies and the empirical state.

    The empirical state ``(I + sum f_i sigma_i) / 2`` is not projected to
    positivity.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    counts = {}
    means = []
    for label, s in zip(PAULI_LABELS, PAULIS):
        p_plus = min(max((1 + np.trace(rho @ s).real) / 2, 0.0), 1.0)
        n_plus = int(rng.binomial(shots, p_plus))
        counts[label] = (n_plus, shots - n_plus)
        means.append((2 * n_plus - shots) / shots)
    est = 0.5 * (I2 + sum(f * s for f, s in zip(means, PAULIS)))
    return counts, est


def _assignments(pairs, shots, seed):
    if shots is None:
        return [Assignment(i, o) for i, o in pairs]
    if seed is None:
        raise ValueError("a seed is required when sampling")
    out = []
    for (rho_in, rho_out), ss in zip(pairs, child_seeds(seed, len(pairs))):
        if rho_out.shape != (2, 2):
            raise DimensionError("measurement simulation supports qubit outputs only")
        counts, est = sample_pauli_counts(rho_out, shots, np.random.default_rng(ss))
        out.append(Assignment(rho_in, est, counts, shots))
    return out


def simulate_counts(
    setup: DynamicsSetup, requests=None, shots: int | None = None, seed: int | None = None
) -> list[Assignment]:
    """Assignments produced by a preparator + unitary setup.

    ``shots=None`` gives exact outputs; otherwise each output is estimated
    from ``shots`` Pauli measurements per basis, with per-input child seeds
    derived from ``seed``.
    """
    requests = setup.preparator.default_requests() if requests is None else list(requests)
    pairs = [effective_transform(setup, r) for r in requests]
    return _assignments(pairs, shots, seed)


def simulate_channel_counts(
    m: QuantumMap, inputs: Sequence, shots: int | None = None, seed: int | None = None
) -> list[Assignment]:
    """Like :func:`simulate_counts` for a known map applied to given inputs."""
    pairs = [(density_matrix(r), m.apply(r)) for r in inputs]
    return _assignments(pairs, shots, seed)


# -- scenario-level diagnosis ------------------------------------------------------


class Verdict(enum.Enum):
    PHYSICAL_CHANNEL = "PhysicalChannel"
    FINITE_SAMPLE_ARTIFACT = "FiniteSampleArtifact"
    CORRELATED_PREPARATOR = "CorrelatedPreparator"
    AMBIGUOUS = "Ambiguous"


class Diagnosis(NamedTuple):
    verdict: Verdict
    compatibility: Compatibility | None
    message: str


def diagnose_scenario(
    report: TomographyReport, setup: DynamicsSetup | None = None, requests=None, tol: float = 1e-8
) -> Diagnosis:
    """Attribute a reconstruction to a physical channel, sampling noise or
    the preparator. Never blames the preparator when finite statistics are
    involved, since sampling noise cannot then be excluded."""
    compat = None
    if setup is not None:
        compat = preparator_compatibility(setup.preparator, setup.unitary, requests, tol)
    if report.cp_verdict:
        return Diagnosis(Verdict.PHYSICAL_CHANNEL, compat, "reconstruction is completely positive")
    finite = report.shot_count is not None
    if finite:
        if compat is None or compat.compatible:
            return Diagnosis(
                Verdict.FINITE_SAMPLE_ARTIFACT,
                compat,
                f"non-CP reconstruction from {report.shot_count} shots with a compatible preparator",
            )
        return Diagnosis(
            Verdict.AMBIGUOUS, compat, "non-CP with finite statistics and an incompatible preparator"
        )
    if compat is Compatibility.INCOMPATIBLE:
        return Diagnosis(
            Verdict.CORRELATED_PREPARATOR,
            compat,
            "non-CP reconstruction from exact data; preparator is dynamically incompatible",
        )
    return Diagnosis(Verdict.AMBIGUOUS, compat, "non-CP reconstruction with no identified cause")
