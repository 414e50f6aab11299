"""Seeded random states, unitaries and channels.

Every helper takes either an integer seed or a ``numpy.random.Generator``
(PCG64). Pure states come from normalized complex-normal vectors, mixed
states from ``G G^dag / Tr`` with complex-normal ``G``.
"""
from __future__ import annotations

import numpy as np

from .channels import QuantumMap, from_kraus
from .linalg import dagger
from .states import bloch_to_state, pure_state



def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def child_seeds(seed: int, n: int) -> list[np.random.SeedSequence]:
    """Independent per-task seed sequences derived from a master seed."""
    return np.random.SeedSequence(seed).spawn(n)


def _ginibre(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_pure_state(d: int, seed=None) -> np.ndarray:
    rng = rng_from(seed)
    return pure_state(_ginibre(rng, d, 1)[:, 0])


def random_density(d: int, seed=None, rank: int | None = None) -> np.ndarray:
    rng = rng_from(seed)
    g = _ginibre(rng, d, rank or d)
    m = g @ dagger(g)
    return m / np.trace(m).real


def random_states(d: int, n: int, seed=None, kind: str = "mixed") -> list[np.ndarray]:
    rng = rng_from(seed)
    if kind == "pure":
        return [random_pure_state(d, rng) for _ in range(n)]
    if kind == "mixed":
        return [random_density(d, rng) for _ in range(n)]
    raise ValueError(f"kind must be 'pure' or 'mixed', got {kind!r}")


def random_unitary(d: int, seed=None) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    rng = rng_from(seed)
    q, r = np.linalg.qr(_ginibre(rng, d, d))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_hermitian(d: int, seed=None) -> np.ndarray:
    rng = rng_from(seed)
    g = _ginibre(rng, d, d)
    return (g + dagger(g)) / 2


def random_channel(d: int, seed=None, rank: int | None = None, d_out: int | None = None) -> QuantumMap:
    """Random CPTP map from a random Stinespring isometry."""
    rng = rng_from(seed)
    d_out = d if d_out is None else d_out
    rank = rank or d * d_out
    q, _ = np.linalg.qr(_ginibre(rng, d_out * rank, d))
    ops = [q[k * d_out:(k + 1) * d_out, :] for k in range(rank)]
    return from_kraus(ops)


def random_kraus_map(d: int, n_ops: int, seed=None) -> QuantumMap:
    """Random CP map (not trace-preserving) from unnormalized Gaussian Kraus operators."""
    rng = rng_from(seed)
    return from_kraus([_ginibre(rng, d, d) / np.sqrt(2 * d) for _ in range(n_ops)])


def bloch_shell(radius: float, n: int, seed=None) -> list[np.ndarray]:
    """``n`` qubit states with Bloch vectors uniform on the sphere of given radius."""
    rng = rng_from(seed)
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return [bloch_to_state(radius * r) for r in v]


def bloch_ball(radius: float, n: int, seed=None) -> list[np.ndarray]:
    """``n`` qubit states with Bloch vectors uniform in the ball of given radius."""
    rng = rng_from(seed)
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1 / 3)
    return [bloch_to_state(rk * vk) for rk, vk in zip(r, v)]
