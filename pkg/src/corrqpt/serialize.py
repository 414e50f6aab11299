"""JSON encodings: matrices as row-major nested ``[re, im]`` pairs."""
from __future__ import annotations

import math

import numpy as np

from .channels import QuantumMap, superop_to_choi
from .errors import DimensionError
from .tomography import Assignment, TomographyReport


def num(x) -> float | None:
    """Plain float for JSON; non-finite values become ``None``."""
    x = float(x)
    return x if math.isfinite(x) else None


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(obj) -> np.ndarray:
    """Inverse of :func:`matrix_to_json`.

    Also accepts square rows of plain real numbers, or a flat row-major
    list of d^2 ``[re, im]`` pairs.
    """
    if not isinstance(obj, list) or not obj:
        raise ValueError("matrix must be a non-empty list")

    def entry(e):
        if isinstance(e, (int, float)) and not isinstance(e, bool):
            return complex(e)
        if isinstance(e, list) and len(e) == 2 and all(isinstance(v, (int, float)) for v in e):
            return complex(e[0], e[1])
        raise ValueError(f"bad matrix entry {e!r}; expected [re, im] or a number")

    if not all(isinstance(r, list) and r for r in obj):
        raise ValueError("matrix must be a list of rows or of [re, im] pairs")
    nested_pairs = isinstance(obj[0][0], list)
    real_rows = not nested_pairs and all(len(r) == len(obj) for r in obj)
    if nested_pairs or real_rows:
        rows = [[entry(e) for e in r] for r in obj]
        if len({len(r) for r in rows}) != 1:
            raise ValueError("matrix rows have different lengths")
        return np.array(rows, dtype=complex)
    flat = [entry(e) for e in obj]
    d = math.isqrt(len(flat))
    if d * d != len(flat):
        raise ValueError(f"flat matrix has {len(flat)} entries, not a perfect square")
    return np.array(flat, dtype=complex).reshape(d, d)


def map_to_json(m: QuantumMap) -> dict:
    return {"dimIn": m.dim_in, "dimOut": m.dim_out, "superop": matrix_to_json(m.superop)}


def map_from_json(obj: dict, tol: float = 1e-10) -> QuantumMap:
    m = QuantumMap(int(obj["dimIn"]), int(obj["dimOut"]), matrix_from_json(obj["superop"]))
    if "choi" in obj:
        given = matrix_from_json(obj["choi"])
        if given.shape != m.choi.shape or np.max(np.abs(given - m.choi)) > tol:
            raise DimensionError("stored Choi matrix disagrees with the superoperator")
    # cross-check of the two representations held by QuantumMap
    back = superop_to_choi(m.superop, m.dim_in, m.dim_out)
    assert np.array_equal(back, m.choi)
    return m


def assignment_to_json(a: Assignment) -> dict:
    out = {"input": matrix_to_json(a.input), "output": matrix_to_json(a.output)}
    if a.counts is not None:
        out["counts"] = {k: list(v) for k, v in sorted(a.counts.items())}
        out["shots"] = a.shots
    return out


def assignment_from_json(obj: dict) -> Assignment:
    counts = obj.get("counts")
    if counts is not None:
        counts = {k: tuple(int(n) for n in v) for k, v in counts.items()}
    return Assignment(
        matrix_from_json(obj["input"]), matrix_from_json(obj["output"]), counts, obj.get("shots")
    )


def report_to_json(r: TomographyReport) -> dict:
    out = {
        "reconstructed": map_to_json(r.reconstructed),
        "choiSpectrum": [float(v) for v in np.sort(r.choi_spectrum)],
        "minChoiEigenvalue": r.min_choi_eigenvalue,
        "cpVerdict": r.cp_verdict,
        "tolerance": r.tolerance,
        "tpDeviation": r.tp_deviation,
        "hermDeviation": r.herm_deviation,
        "conditionNumber": num(r.condition_number),
        "residual": r.residual,
        "seed": r.seed,
        "shotCount": r.shot_count,
        "ncp": None,
    }
    if r.ncp is not None:
        target = r.reconstructed
        herm = QuantumMap.from_choi((target.choi + target.choi.conj().T) / 2, target.dim_in, target.dim_out)
        eye = np.eye(r.ncp.dim_in)
        out["ncp"] = {
            "q": r.ncp.q,
            "negativeCount": len(r.ncp.negative),
            "reassemblyError": r.ncp.to_map().distance(herm),
            "orthogonalityDefect": r.ncp.orthogonality_defect(),
            "traceIdentityDeviation": float(np.max(np.abs(r.ncp.trace_identity() - eye))),
        }
    return out
