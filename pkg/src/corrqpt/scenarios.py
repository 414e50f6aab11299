"""Scenario definitions and their execution into JSON-ready reports.

A scenario file is a JSON object::

    {"name": ..., "seed": 0, "tolerance": 1e-9,
     "builtin": "<tag>"}                                   # or
    {"name": ..., "preparator": {...}, "unitary": M,
     "inputs": [...], "shots": N}                           # or
    {"name": ..., "preparator": {"kind": "factorized", ...},
     "hamiltonian": M, "times": {"start": a, "stop": b, "steps": n}}

Matrices are row-major nested ``[re, im]`` pairs (rows of plain reals are
accepted too).
"""
from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import __version__
from .channels import (
    QuantumMap,
    bloch_affine,
    compose,
    depolarizing,
    from_kraus,
    identity,
    is_cp,
    not_map,
    phase_damping,
    replacement_map,
    swap_unitary,
    transpose_map,
    unitary_map,
)
from .dynamics import (
    DynamicsSetup,
    TimeFamily,
    depolarizing_dilation,
    intermediate_map,
    positivity_scan,
    preimage_scan,
    semigroup_check,
)
from .errors import (
    DimensionError,
    NotAStateError,
    NotCPTPError,
    NotHermitianError,
    NotUnitaryError,
    ScenarioError,
)
from .linalg import dagger
from .preparation import (
    Factorized,
    Preparator,
    PreparingOps,
    SingletPostselect,
    SwapTarget,
    preparator_compatibility,
)
from .sampling import bloch_ball, bloch_shell, random_states
from .serialize import assignment_to_json, map_to_json, matrix_from_json, matrix_to_json, num, report_to_json
from .states import BipartiteState, density_matrix, direction_state, singlet
from .tomography import default_inputs, diagnose_scenario, linear_inversion, simulate_channel_counts, simulate_counts

SCHEMA_VERSION = 1

BUILTINS = {
    "perfect-not-swap": "any rho_in -> rho_out via SWAP; per-input targets give the perfect NOT",
    "singlet-postselect-not": "singlet postselection followed by SWAP looks like a perfect NOT",
    "depolarizing-intermediate": "NOT as intermediate map E_x o E_-x^-1 of depolarizing channels",
    "finite-stats": "non-CP reconstructions from finite Pauli-measurement statistics",
    "semigroup-demo": "semigroup and three-time composition checks for a partial-swap family",
}

_DEFINITION_ERRORS = (
    ValueError,
    KeyError,
    TypeError,
    IndexError,
    DimensionError,
    NotAStateError,
    NotCPTPError,
    NotHermitianError,
    NotUnitaryError,
)


@dataclass
class Scenario:
    name: str
    seed: int
    tolerance: float
    builtin: str | None
    raw: dict
    source_hash: str
    plan: Any = field(default=None, repr=False)


def _canonical_hash(raw: dict) -> str:
    text = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ScenarioError(f"{source}:1:1: scenario must be a JSON object")
    return scenario_from_dict(raw, source)


def scenario_from_dict(raw: dict, source: str = "<scenario>") -> Scenario:
    builtin = raw.get("builtin")
    if builtin is not None and builtin not in BUILTINS:
        raise ScenarioError(f"{source}: unknown builtin {builtin!r}; choose from {sorted(BUILTINS)}")
    if builtin is None and "preparator" not in raw:
        raise ScenarioError(f"{source}: scenario needs either 'builtin' or 'preparator'")
    name = raw.get("name", builtin)
    if not isinstance(name, str) or not name:
        raise ScenarioError(f"{source}: 'name' must be a non-empty string")
    try:
        seed = int(raw.get("seed", 0))
        tol = float(raw.get("tolerance", 1e-9))
    except (TypeError, ValueError):
        raise ScenarioError(f"{source}: 'seed' must be an integer and 'tolerance' a number") from None
    if tol <= 0:
        raise ScenarioError(f"{source}: tolerance must be positive")
    return Scenario(name, seed, tol, builtin, raw, _canonical_hash(raw))


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_scenario(text, str(path))


def builtin_scenario(tag: str) -> Scenario:
    return scenario_from_dict({"name": tag, "builtin": tag})


# -- parsing of scenario components ------------------------------------------------


def _matrix(obj, what: str) -> np.ndarray:
    try:
        return matrix_from_json(obj)
    except ValueError as exc:
        raise ScenarioError(f"{what}: {exc}") from None


def _state(obj, what: str) -> np.ndarray:
    if isinstance(obj, dict) and "bloch" in obj:
        from .states import bloch_to_state

        return bloch_to_state(obj["bloch"])
    return density_matrix(_matrix(obj, what))


def parse_map(obj, what: str = "map") -> QuantumMap:
    if not isinstance(obj, dict):
        raise ScenarioError(f"{what}: expected an object")
    if "kraus" in obj:
        return from_kraus([_matrix(k, f"{what}.kraus") for k in obj["kraus"]])
    if "unitary" in obj:
        return unitary_map(_matrix(obj["unitary"], f"{what}.unitary"))
    if "superop" in obj:
        from .serialize import map_from_json

        return map_from_json(obj)
    named = obj.get("named")
    factories: dict[str, Callable[[], QuantumMap]] = {
        "identity": lambda: identity(int(obj.get("d", 2))),
        "not": not_map,
        "transpose": lambda: transpose_map(int(obj.get("d", 2))),
        "depolarizing": lambda: depolarizing(float(obj["x"])),
        "phase_damping": lambda: phase_damping(float(obj.get("p", 1.0))),
    }
    if named not in factories:
        raise ScenarioError(f"{what}: unknown map {named!r}")
    return factories[named]()


def parse_preparator(obj) -> Preparator:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ScenarioError("preparator: expected an object with a 'kind'")
    kind = obj["kind"]
    if kind == "factorized":
        xi = _state(obj["xi"], "preparator.xi")
        return Factorized(xi, dim_a=int(obj.get("dimA", 2)))
    if kind == "swap_target":
        if "target_map" in obj:
            m = parse_map(obj["target_map"], "preparator.target_map")
            return SwapTarget(m.apply, dim_a=m.dim_in)
        return SwapTarget(_state(obj["rho_out"], "preparator.rho_out"))
    if kind == "singlet_postselect":
        return SingletPostselect()
    if kind == "preparing_ops":
        if obj.get("omega") == "singlet":
            omega = singlet()
        else:
            d_a, d_b = (int(v) for v in obj["dims"])
            omega = BipartiteState(_matrix(obj["omega"], "preparator.omega"), d_a, d_b)
        ops = tuple(parse_map(o, f"preparator.ops[{i}]") for i, o in enumerate(obj["ops"]))
        return PreparingOps(omega, ops)
    raise ScenarioError(f"preparator: unknown kind {kind!r}")


def parse_requests(obj, p: Preparator) -> list:
    if obj is None:
        return p.default_requests()
    if not isinstance(obj, list) or not obj:
        raise ScenarioError("inputs: expected a non-empty list")
    if isinstance(p, SingletPostselect):
        out = []
        for i, n in enumerate(obj):
            n = np.asarray(n.get("bloch") if isinstance(n, dict) else n, dtype=float)
            if n.shape != (3,) or not np.linalg.norm(n) > 0:
                raise ScenarioError(f"inputs[{i}]: expected a nonzero Bloch direction")
            out.append(n)
        return out
    if isinstance(p, PreparingOps):
        return [int(i) for i in obj]
    return [_state(s, f"inputs[{i}]") for i, s in enumerate(obj)]


def parse_times(obj) -> list[float]:
    if isinstance(obj, dict):
        start, stop, steps = float(obj["start"]), float(obj["stop"]), int(obj["steps"])
        if steps < 1:
            raise ScenarioError("times.steps must be >= 1")
        ts = list(np.linspace(start, stop, steps))
    elif isinstance(obj, list):
        ts = [float(t) for t in obj]
    else:
        raise ScenarioError("times: expected {start, stop, steps} or a list")
    if any(t < 0 for t in ts):
        raise ScenarioError("times must be nonnegative")
    return ts


# -- plans ----------------------------------------------------------------------------


@dataclass
class TomographyPlan:
    setup: DynamicsSetup
    requests: list
    shots: int | None
    contrast: "TomographyPlan | None" = None


@dataclass
class TimePlan:
    family: TimeFamily
    times: list[float]


@dataclass
class DepolarizingPlan:
    x: float
    ball_samples: int
    shell_samples: int


@dataclass
class FiniteStatsPlan:
    x: float
    shots: int
    seeds: int
    high_shots: int


def _shots(raw) -> int | None:
    shots = raw.get("shots")
    if shots is None:
        return None
    if not isinstance(shots, int) or shots < 1:
        raise ScenarioError("shots must be a positive integer")
    return shots


def _rotation_to(n) -> np.ndarray:
    """Unitary taking |0> to the pure state along ``n``."""
    psi = np.linalg.eigh(direction_state(n))[1][:, -1]
    perp = np.array([-np.conj(psi[1]), np.conj(psi[0])])
    return np.column_stack([psi, perp])


def _build_builtin(s: Scenario):
    raw = s.raw
    swap = swap_unitary(2)
    if s.builtin == "perfect-not-swap":
        return TomographyPlan(DynamicsSetup(SwapTarget(not_map().apply), swap), default_inputs(2), _shots(raw))
    if s.builtin == "singlet-postselect-not":
        p = SingletPostselect()
        # same apparatus, but states generated by rotating the postselected |0>
        after = BipartiteState.product(direction_state((0, 0, 1)), direction_state((0, 0, -1)))
        rot = PreparingOps(after, tuple(unitary_map(_rotation_to(n)) for n in p.default_requests()))
        return TomographyPlan(
            DynamicsSetup(p, swap),
            p.default_requests(),
            _shots(raw),
            contrast=TomographyPlan(DynamicsSetup(rot, swap), rot.default_requests(), None),
        )
    if s.builtin == "depolarizing-intermediate":
        x = float(raw.get("x", 1 / 3))
        if not 0 < x <= 1 / 3 + 1e-12:
            raise ScenarioError("x must lie in (0, 1/3] for both maps to be CP")
        return DepolarizingPlan(x, int(raw.get("ballSamples", 500)), int(raw.get("shellSamples", 100)))
    if s.builtin == "finite-stats":
        x = float(raw.get("x", 1.0))
        depolarizing_dilation(x)  # validates the range
        return FiniteStatsPlan(
            x, int(raw.get("shots", 1000)), int(raw.get("seeds", 20)), int(raw.get("highShots", 10**6))
        )
    if s.builtin == "semigroup-demo":
        h = _matrix(raw["hamiltonian"], "hamiltonian") if "hamiltonian" in raw else swap
        xi = _state(raw["xi"], "xi") if "xi" in raw else np.diag([1.0, 0.0]).astype(complex)
        times = parse_times(raw.get("times", {"start": 0.2, "stop": 0.8, "steps": 4}))
        return TimePlan(TimeFamily(h, xi, tuple(times)), times)
    raise AssertionError(s.builtin)


def _build_custom(s: Scenario):
    raw = s.raw
    p = parse_preparator(raw["preparator"])
    if "unitary" in raw:
        setup = DynamicsSetup(p, _matrix(raw["unitary"], "unitary"))
        return TomographyPlan(setup, parse_requests(raw.get("inputs"), p), _shots(raw))
    if "hamiltonian" in raw:
        if not isinstance(p, Factorized):
            raise ScenarioError("time families need a 'factorized' preparator")
        times = parse_times(raw.get("times"))
        return TimePlan(TimeFamily(_matrix(raw["hamiltonian"], "hamiltonian"), p.xi, tuple(times)), times)
    raise ScenarioError("custom scenario needs 'unitary' or 'hamiltonian' + 'times'")


def build(s: Scenario):
    """Construct and validate every object the scenario needs without running it."""
    try:
        plan = _build_builtin(s) if s.builtin else _build_custom(s)
    except ScenarioError:
        raise
    except _DEFINITION_ERRORS as exc:
        raise ScenarioError(f"{type(exc).__name__}: {exc}") from None
    s.plan = plan
    return plan


# -- execution -----------------------------------------------------------------------


def _fmt(v: float) -> str:
    return f"{v:+.6f}"


def _bloch_section(m: QuantumMap) -> tuple[dict, list[str]]:
    mat, t = bloch_affine(m)
    lines = ["Bloch action r -> M r + t:"]
    for row, ti in zip(mat, t):
        lines.append("  [" + " ".join(_fmt(v) for v in row) + f" ]   t: {_fmt(ti)}")
    return {"matrix": mat.tolist(), "translation": t.tolist()}, lines


def _run_tomography(plan: TomographyPlan, seed: int, tol: float) -> tuple[dict, list[str]]:
    assignments = simulate_counts(plan.setup, plan.requests, plan.shots, seed if plan.shots else None)
    report = linear_inversion(assignments, tol=tol, seed=seed)
    diag = diagnose_scenario(report, plan.setup, plan.requests)
    out = report_to_json(report)
    out["diagnosis"] = diag.verdict.value
    out["diagnosisMessage"] = diag.message
    out["compatibility"] = diag.compatibility.value if diag.compatibility else None
    out["assignments"] = [assignment_to_json(a) for a in assignments]
    lines = [
        "Choi spectrum: " + ", ".join(_fmt(v) for v in report.choi_spectrum),
        f"Verdict: {'CP' if report.cp_verdict else 'NOT CP'} "
        f"(min Choi eigenvalue {report.min_choi_eigenvalue:+.3e}, tol {tol:g}); "
        f"diagnosis {diag.verdict.value}",
        f"Residual {report.residual:.3e}; TP deviation {report.tp_deviation:.3e}; "
        f"design condition {report.condition_number:.3g}",
    ]
    if report.ncp is not None:
        lines.append(f"Difference-of-CP form: {report.ncp.q} positive, {len(report.ncp.negative)} negative Kraus operators")
    if (report.reconstructed.dim_in, report.reconstructed.dim_out) == (2, 2):
        out["blochAffine"], bl = _bloch_section(report.reconstructed)
        lines += bl
    return out, lines


def _run_depolarizing(plan: DepolarizingPlan, seed: int, tol: float) -> tuple[dict, list[str]]:
    x = plan.x
    e1, e2 = depolarizing(-x), depolarizing(x)
    inter = intermediate_map(e1, e2, label="t1")
    cp1, cp2, cpi = is_cp(e1, tol), is_cp(e2, tol), is_cp(inter, tol)
    dist = inter.distance(not_map())
    ball = bloch_ball(x, plan.ball_samples, seed)
    shell = bloch_shell(1.0, plan.shell_samples, seed + 1)
    inside = preimage_scan(e1, ball, tol, seed)
    outside = preimage_scan(e1, shell, tol, seed + 1)
    images = [e1.apply(r) for r in random_states(2, plan.ball_samples, seed + 2)]
    on_image = positivity_scan(inter, images, tol, seed + 2)
    whole = positivity_scan(inter, shell, tol, seed + 1)

    def scan(r):
        return {"tested": r.tested, "violating": r.violating, "worstEigenvalue": r.worst_eigenvalue, "seed": r.seed}

    out = {
        "x": x,
        "firstMapCP": cp1.is_cp,
        "secondMapCP": cp2.is_cp,
        "intermediate": map_to_json(inter),
        "intermediateChoiSpectrum": inter.choi_spectrum().tolist(),
        "intermediateCP": cpi.is_cp,
        "minChoiEigenvalue": cpi.min_eigenvalue,
        "distanceToNot": dist,
        "realizationDomain": {"ballRadius": x, "insideBall": scan(inside), "unitShell": scan(outside)},
        "positivityOnImages": scan(on_image),
        "positivityOnUnitShell": scan(whole),
        "tolerance": tol,
        "seed": seed,
        "shotCount": None,
        "residual": None,
    }
    out["blochAffine"], bl = _bloch_section(inter)
    lines = [
        f"E_x o E_-x^-1 with x = {x:.6g}: distance to NOT map {dist:.3e}",
        "Choi spectrum: " + ", ".join(_fmt(v) for v in out["intermediateChoiSpectrum"]),
        f"Verdict: {'CP' if cpi.is_cp else 'NOT CP'} (min Choi eigenvalue {cpi.min_eigenvalue:+.3e})",
        f"Realization domain |r| <= {x:.4g}: {inside.violating}/{inside.tested} states outside",
        f"Unit Bloch sphere: {outside.violating}/{outside.tested} states outside",
        f"Positivity on E_t1 images: {on_image.violating}/{on_image.tested} violations",
    ] + bl
    return out, lines


def _run_finite_stats(plan: FiniteStatsPlan, seed: int, tol: float) -> tuple[dict, list[str]]:
    u, xi = depolarizing_dilation(plan.x)
    setup = DynamicsSetup(Factorized(xi), u)
    main, lines = _run_tomography(TomographyPlan(setup, default_inputs(2), plan.shots), seed, tol)
    target = depolarizing(plan.x)
    sweep = {}
    for shots in (plan.shots, plan.high_shots):
        mins = []
        for k in range(plan.seeds):
            a = simulate_channel_counts(target, default_inputs(2), shots, seed + k)
            mins.append(linear_inversion(a, tol=tol, seed=seed + k).min_choi_eigenvalue)
        sweep[str(shots)] = {
            "seeds": [seed + k for k in range(plan.seeds)],
            "minChoiEigenvalues": mins,
            "nonCP": int(sum(v < -tol for v in mins)),
            "negative": int(sum(v < 0 for v in mins)),
            "maxAbsMinEigenvalue": float(max(abs(v) for v in mins)),
        }
    main["x"] = plan.x
    main["sweep"] = sweep
    for shots, s in sweep.items():
        lines.append(
            f"N = {shots}: {s['negative']}/{len(s['seeds'])} seeds with negative min Choi eigenvalue; "
            f"max |min eig| = {s['maxAbsMinEigenvalue']:.3e}"
        )
    return main, lines


def _run_time_family(plan: TimePlan, seed: int, tol: float) -> tuple[dict, list[str]]:
    fam, ts = plan.family, plan.times
    maps = {t: fam(t) for t in ts}
    per_time = []
    for t in ts:
        v = is_cp(maps[t], tol)
        per_time.append({"t": t, "cp": v.is_cp, "minChoiEigenvalue": v.min_eigenvalue, "tpDeviation": maps[t].tp_deviation()})
    pairs = list(itertools.product(ts, ts))
    semi = semigroup_check(fam, pairs, tol)
    inter = []
    for t1, t2 in zip(ts, ts[1:]):
        m = intermediate_map(maps[t1], maps[t2], label=f"t={t1:g}")
        v = is_cp(m, tol)
        inter.append({
            "t1": t1, "t2": t2, "cp": v.is_cp, "minChoiEigenvalue": v.min_eigenvalue,
            "tpDeviation": m.tp_deviation(), "hermDeviation": m.hermiticity_deviation(),
        })
    cocycle = []
    for t1, t2, t3 in itertools.combinations(ts, 3):
        direct = intermediate_map(maps[t1], maps[t3], label=f"t={t1:g}")
        chained = compose(intermediate_map(maps[t2], maps[t3], label=f"t={t2:g}"), intermediate_map(maps[t1], maps[t2]))
        cocycle.append({"t1": t1, "t2": t2, "t3": t3, "deviation": direct.distance(chained)})
    out = {
        "times": ts,
        "maps": per_time,
        "semigroup": [{"t": v.t, "s": v.s, "deviation": v.deviation, "holds": v.holds} for v in semi],
        "semigroupAllHold": all(v.holds for v in semi),
        "intermediate": inter,
        "cocycle": cocycle,
        "cocycleMaxDeviation": max((c["deviation"] for c in cocycle), default=0.0),
        "tolerance": tol,
        "seed": seed,
        "shotCount": None,
        "residual": None,
    }
    failed = [v for v in semi if not v.holds]
    lines = [
        f"Times: {', '.join(f'{t:g}' for t in ts)}",
        f"All E_t CP: {all(p['cp'] for p in per_time)}",
        f"Semigroup: {len(semi) - len(failed)}/{len(semi)} pairs hold (tol {tol:g})"
        + (f"; worst deviation {max(v.deviation for v in failed):.3e}" if failed else ""),
        f"Intermediate maps CP: {sum(i['cp'] for i in inter)}/{len(inter)}",
        f"Three-time composition: max deviation {out['cocycleMaxDeviation']:.3e}",
    ]
    return out, lines


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return num(obj)
    return obj


def run_scenario(s: Scenario, seed: int | None = None, tol: float | None = None) -> tuple[dict, str]:
    """Execute a scenario; return the JSON report dict and the text report."""
    seed = s.seed if seed is None else seed
    tol = s.tolerance if tol is None else tol
    plan = s.plan if s.plan is not None else build(s)
    if isinstance(plan, TomographyPlan):
        body, lines = _run_tomography(plan, seed, tol)
        if plan.contrast is not None:
            c, clines = _run_tomography(plan.contrast, seed, tol)
            body["contrast"] = c
            lines += ["", "Contrast (same device, states made by rotating one postselected state):"]
            lines += ["  " + l for l in clines]
    elif isinstance(plan, DepolarizingPlan):
        body, lines = _run_depolarizing(plan, seed, tol)
    elif isinstance(plan, FiniteStatsPlan):
        body, lines = _run_finite_stats(plan, seed, tol)
    else:
        body, lines = _run_time_family(plan, seed, tol)
    report = {
        "schema": SCHEMA_VERSION,
        "name": s.name,
        "builtin": s.builtin,
        "scenarioHash": s.source_hash,
        "version": __version__,
        "seed": seed,
        "tolerance": tol,
        "results": body,
    }
    header = [
        f"Scenario: {s.name}" + (f" (builtin {s.builtin})" if s.builtin else ""),
        f"Seed {seed}; tolerance {tol:g}; scenario hash {s.source_hash[:16]}; corrqpt {__version__}",
        "",
    ]
    return _clean(report), "\n".join(header + lines) + "\n"


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"
