"""Monte Carlo samples of ``{phi(U)}`` for a state on ``M_n``.

Samplers:

``haar``
    ``U`` Haar-distributed on ``U(n)``.
``diagonal``
    ``U`` diagonal in the eigenbasis of the density, i.e. the commutative
    case: the values are ``sum_j c_j z_j`` with independent uniform phases.
``projection``
    ``U = e^{ib} (2P - I)`` with ``P`` a Haar-rotated coordinate projection of
    uniformly random rank.

Work is split over workers by seed partitioning (worker ``w`` draws from
``seed + w``) and merged in worker order, so output is independent of
scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .states import DensityState

SAMPLERS = ("haar", "diagonal", "projection")
GRID = 64
RADIUS = 0.99


def haar_batch(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar unitaries, shape ``(count, n, n)``, by batched Gram-Schmidt."""
    Z = (rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))) / math.sqrt(2)
    Q = np.empty_like(Z)
    for j in range(n):
        v = Z[:, :, j].copy()
        for _ in range(2):
            if j:
                coef = np.einsum("bij,bi->bj", Q[:, :, :j].conj(), v)
                v -= np.einsum("bij,bj->bi", Q[:, :, :j], coef)
        Q[:, :, j] = v / np.linalg.norm(v, axis=1, keepdims=True)
    return Q


def _sample_chunk(state: DensityState, sampler: str, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    n = state.n
    if count == 0:
        return np.zeros(0, dtype=complex)
    if sampler == "diagonal":
        z = np.exp(2j * np.pi * rng.uniform(size=(count, n)))
        return z @ state.weights
    U = haar_batch(n, count, rng)
    if sampler == "haar":
        return np.einsum("ij,bji->b", state.A, U)
    if sampler == "projection":
        rank = rng.integers(0, n + 1, size=count)
        beta = 2 * np.pi * rng.uniform(size=count)
        mask = (np.arange(n)[None, :] < rank[:, None]).astype(float)
        P = np.einsum("bij,bj,bkj->bik", U, mask, U.conj())
        refl = 2 * P - np.eye(n)[None]
        return np.exp(1j * beta) * np.einsum("ij,bji->b", state.A, refl)
    raise InvalidInput(f"unknown sampler {sampler!r}")


def sample_range(
    state: DensityState, sampler: str, samples: int, seed: int = 0, workers: int = 1
) -> np.ndarray:
    if sampler not in SAMPLERS:
        raise InvalidInput(f"sampler must be one of {SAMPLERS}")
    if samples < 1:
        raise InvalidInput("need at least one sample")
    workers = max(1, min(int(workers), samples))
    base, extra = divmod(samples, workers)
    counts = [base + (w < extra) for w in range(workers)]
    if workers == 1:
        return _sample_chunk(state, sampler, counts[0], seed)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda w: _sample_chunk(state, sampler, counts[w], seed + w), range(workers)))
    return np.concatenate(parts)


@dataclass(frozen=True)
class CoverageStats:
    samples: int
    cells_inside: int
    cells_hit: int
    coverage: float
    min_modulus: float
    max_modulus: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def inside_cells(grid: int = GRID, radius: float = RADIUS) -> np.ndarray:
    """Boolean mask of grid cells over ``[-1, 1]^2`` lying wholly in the disk."""
    edges = np.linspace(-1.0, 1.0, grid + 1)
    lo, hi = edges[:-1], edges[1:]
    far = np.maximum(np.abs(lo), np.abs(hi))
    return np.hypot(far[:, None], far[None, :]) <= radius


def coverage(points, grid: int = GRID, radius: float = RADIUS) -> CoverageStats:
    z = np.asarray(points, dtype=complex)
    ix = np.clip(np.floor((z.real + 1.0) / 2.0 * grid).astype(int), 0, grid - 1)
    iy = np.clip(np.floor((z.imag + 1.0) / 2.0 * grid).astype(int), 0, grid - 1)
    hit = np.zeros((grid, grid), dtype=bool)
    hit[ix, iy] = True
    mask = inside_cells(grid, radius)
    n_in = int(mask.sum())
    n_hit = int((hit & mask).sum())
    mod = np.abs(z)
    return CoverageStats(len(z), n_in, n_hit, n_hit / n_in, float(mod.min()), float(mod.max()))


def to_csv(points) -> str:
    lines = ["re,im"]
    lines += [f"{z.real!r},{z.imag!r}" for z in map(complex, np.asarray(points, dtype=complex))]
    return "\n".join(lines) + "\n"
