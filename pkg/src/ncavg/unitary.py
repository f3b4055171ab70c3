"""Unitaries with few eigenvalues that send a state to a prescribed point.

For a state on ``M_n`` with ``n > 1`` every point of the closed unit disk is
the value of the state at a unitary with at most three distinct eigenvalues
(two when ``n`` is even).  The even case is closed form; the odd case builds
a zero of the state with three eigenvalues and walks the spectral path from
the identity to it, bisecting on the modulus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionTooSmall,
    EvenDimension,
    Infeasible,
    InvalidInput,
    NotADensity,
    OddDimension,
    TargetOutsideDisk,
)
from .linalg import CLUSTER_TOL, count_phase_clusters, polar_decompose
from .states import DensityState, TraceFunctional

SQRT1_2 = 1.0 / math.sqrt(2.0)


def as_target(w) -> complex:
    """Validate a disk target; moduli in ``(1, 1 + 1e-12]`` snap onto the circle."""
    w = complex(w)
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise InvalidInput("target must be finite")
    r = abs(w)
    if r > 1.0 + 1e-12:
        raise TargetOutsideDisk(f"|w| = {r!r} > 1")
    if r > 1.0:
        w /= r
    return w


def arg(w: complex) -> float:
    # arg(0) = 0: any phase works at the origin
    return 0.0 if w == 0 else math.atan2(w.imag, w.real)


@dataclass(frozen=True, eq=False)
class SpectralUnitary:
    """``e^{i alpha} sum_j e^{i theta_j} F_j F_j^H`` with at most three frames.

    The frames are orthonormal column blocks whose projections sum to the
    identity, so the eigenvalue budget is visible from the representation.
    """

    phases: tuple[float, ...]
    frames: tuple[np.ndarray, ...]
    global_phase: float = 0.0

    def __post_init__(self):
        if len(self.phases) != len(self.frames):
            raise ValueError("one phase per frame")
        if len(self.frames) > 3:
            raise ValueError("at most three spectral frames")
        n = self.n
        total = sum(F @ F.conj().T for F in self.frames)
        if np.linalg.norm(total - np.eye(n)) > 1e-10:
            raise ValueError("spectral projections do not sum to the identity")

    @property
    def n(self) -> int:
        return self.frames[0].shape[0]

    @property
    def eigenphases(self) -> np.ndarray:
        return np.array([self.global_phase + t for t in self.phases])

    def matrix(self) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=complex)
        for t, F in zip(self.eigenphases, self.frames):
            out += np.exp(1j * t) * (F @ F.conj().T)
        return out

    def cluster_count(self, tol: float = CLUSTER_TOL) -> int:
        live = [t for t, F in zip(self.eigenphases, self.frames) if F.shape[1]]
        return count_phase_clusters(live, tol)

    def conjugated_by(self, V: np.ndarray) -> "SpectralUnitary":
        """Same spectrum, frames mapped through the unitary ``V``."""
        return SpectralUnitary(self.phases, tuple(V @ F for F in self.frames), self.global_phase)

    def rotated(self, beta: float) -> "SpectralUnitary":
        return SpectralUnitary(self.phases, self.frames, self.global_phase + beta)

    def along_path(self, s: float) -> "SpectralUnitary":
        """Point ``s`` of the path ``I -> self`` that scales every eigenphase."""
        return SpectralUnitary(tuple(s * t for t in self.eigenphases), self.frames, 0.0)

    def frame_masses(self, weights: np.ndarray) -> np.ndarray:
        """``tr(A P_j)`` for a density diagonal in the basis the frames live in."""
        return np.array([float(np.sum(weights[:, None] * np.abs(F) ** 2)) for F in self.frames])


def first_crossing(
    g: Callable[[float], float],
    level: float,
    tol: float = 1e-12,
    grid: int = 64,
    max_iter: int = 200,
    end_slack: float = 1e-9,
) -> float:
    """Smallest grid-bracketed ``s`` in ``[0, 1]`` with ``g(s) = level``.

    Assumes ``g(0) >= level >= g(1)`` up to ``end_slack``; ``g`` need not be
    monotone.  A coarse scan locates the first sign change, then bisection
    drives ``|g(s) - level|`` below ``tol``.
    """
    h0 = g(0.0) - level
    if abs(h0) <= tol:
        return 0.0
    lo = 0.0
    for i in range(1, grid + 1):
        s = i / grid
        h = g(s) - level
        if h <= tol:
            if h >= -tol:
                return s
            hi = s
            break
        lo = s
    else:
        if g(1.0) - level <= end_slack:
            return 1.0
        raise ConvergenceFailure("path endpoints do not bracket the target modulus")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        h = g(mid) - level
        if abs(h) <= tol:
            return mid
        if h > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps:
            break
    # bracket collapsed to machine precision; accept the better endpoint
    best = min((lo, hi), key=lambda s: abs(g(s) - level))
    if abs(g(best) - level) <= 1e3 * tol:
        return best
    raise ConvergenceFailure(f"bisection stalled at residual {abs(g(best) - level):.3e}")


def _check_weights(c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise InvalidInput("weights must be a non-empty vector")
    if np.any(c < -1e-12) or abs(c.sum() - 1.0) > 1e-10:
        raise NotADensity("weights must be non-negative and sum to 1")
    return np.clip(c, 0.0, None)


def _swap_frames(n: int) -> tuple[np.ndarray, np.ndarray]:
    plus = np.zeros((n, n // 2), dtype=complex)
    minus = np.zeros((n, n // 2), dtype=complex)
    for j in range(n // 2):
        plus[2 * j, j] = plus[2 * j + 1, j] = SQRT1_2
        minus[2 * j, j] = SQRT1_2
        minus[2 * j + 1, j] = -SQRT1_2
    return plus, minus


def even_zero_unitary(n: int) -> SpectralUnitary:
    """Direct sum of ``n/2`` swap blocks ``[[0, 1], [1, 0]]``; zero diagonal."""
    if n < 2 or n % 2:
        raise OddDimension(f"n = {n} must be even and >= 2")
    plus, minus = _swap_frames(n)
    return SpectralUnitary((0.0, math.pi), (plus, minus))


def even_disk_unitary(c, w) -> SpectralUnitary:
    """Unitary in the weight basis with every diagonal entry equal to ``w``.

    ``U(t) = P + e^{i pi t} (I - P)`` with ``P`` onto the symmetric pair
    vectors has constant diagonal ``(1 + e^{i pi t}) / 2``, whatever the
    weights, so ``t`` and a global phase are read off from ``w`` directly.
    """
    c = _check_weights(c)
    n = c.size
    if n % 2:
        raise OddDimension(f"n = {n} must be even")
    w = as_target(w)
    t = (2.0 / math.pi) * math.acos(min(abs(w), 1.0))
    alpha = arg(w) - math.pi * t / 2.0 if w != 0 else 0.0
    plus, minus = _swap_frames(n)
    return SpectralUnitary((0.0, math.pi * t), (plus, minus), alpha)


def odd_zero_unitary(c) -> SpectralUnitary:
    """Three-eigenvalue unitary ``U0 (+) 1`` on which the diagonal state vanishes.

    ``c`` must be sorted descending so the last weight is the smallest and
    hence below one half.
    """
    c = _check_weights(c)
    n = c.size
    if n % 2 == 0:
        raise EvenDimension(f"n = {n} must be odd")
    if n < 3:
        raise DimensionTooSmall("odd construction needs n >= 3")
    if np.any(np.diff(c) > 1e-15):
        raise InvalidInput("weights must be sorted descending")
    last = c[-1]
    head = c[:-1] / (1.0 - last)
    head = head / head.sum()
    sub = even_disk_unitary(head, -last / (1.0 - last))
    pad = lambda F: np.vstack([F, np.zeros((1, F.shape[1]), dtype=complex)])
    e_last = np.zeros((n, 1), dtype=complex)
    e_last[-1, 0] = 1.0
    phases = tuple(sub.global_phase + p for p in sub.phases) + (0.0,)
    return SpectralUnitary(phases, tuple(pad(F) for F in sub.frames) + (e_last,))


def solve_state_unitary(s: DensityState, w, tol: float = 1e-12) -> SpectralUnitary:
    """Unitary ``U`` with ``tr(AU) = w`` and at most 3 (2 if n even) eigenvalues."""
    w = as_target(w)
    n = s.n
    c, V = s.weights, s.frame
    if n == 1:
        if abs(abs(w) - 1.0) > 1e-12:
            raise DimensionTooSmall("on M_1 only unimodular targets are reachable")
        return SpectralUnitary((arg(w),), (np.eye(1, dtype=complex),))
    if n % 2 == 0:
        return even_disk_unitary(c, w).conjugated_by(V)
    zero = odd_zero_unitary(c)
    theta = zero.eigenphases
    masses = zero.frame_masses(c)
    value = lambda t: complex(np.sum(masses * np.exp(1j * t * theta)))
    r = abs(w)
    t_star = first_crossing(lambda t: abs(value(t)), r, tol=tol)
    on_path = zero.along_path(t_star)
    beta = arg(w) - arg(value(t_star))
    return on_path.rotated(beta).conjugated_by(V)


def solve_functional_unitary(f: TraceFunctional, w) -> np.ndarray:
    """Unitary ``X0`` with ``tr(B X0) = w`` for ``tr|B| = 1``.

    With ``B = U_p |B|`` we solve for the state with density ``|B|`` and
    undo the polar factor: ``tr(B V U_p^H) = tr(|B| V)``.
    """
    w = as_target(w)
    if abs(f.trace_norm - 1.0) > 1e-10:
        raise InvalidInput(f"functional must have trace norm 1, got {f.trace_norm!r}")
    Up, P = polar_decompose(f.B)
    V = solve_state_unitary(DensityState.from_matrix(P, normalize=True), w)
    return V.matrix() @ Up.conj().T


def rank_one_annihilator(f: TraceFunctional | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit vectors ``x, y`` with ``<Bx, y> = tr(B x y^H) = 0``."""
    if isinstance(f, TraceFunctional):
        B, sv = f.B, f.sv
    else:
        tf = TraceFunctional.from_matrix(f)
        B, sv = tf.B, tf.sv
    n = B.shape[0]
    if n == 1:
        if abs(B[0, 0]) > 1e-14:
            raise DimensionTooSmall("no rank-one annihilator on M_1")
        one = np.ones(1, dtype=complex)
        return one, one.copy()
    x = sv.V[:, 0].copy()
    Bx = B @ x
    nb = np.linalg.norm(Bx)
    if nb <= 1e-14:
        return x, sv.V[:, 1].copy()
    u = Bx / nb
    E = np.eye(n, dtype=complex)
    R = E - np.outer(u, u.conj() @ E)
    R = R - np.outer(u, u.conj() @ R)
    j = int(np.argmax(np.linalg.norm(R, axis=0)))
    y = R[:, j] / np.linalg.norm(R[:, j])
    y = y - u * np.vdot(u, y)
    return x, y / np.linalg.norm(y)


def commutative_average(n: int, w) -> np.ndarray:
    """``n`` points on the unit circle whose mean is ``w``."""
    w = as_target(w)
    if n < 1:
        raise InvalidInput("n must be >= 1")
    r = abs(w)
    if n == 1:
        if abs(r - 1.0) > 1e-12:
            raise Infeasible("a single unimodular point has mean of modulus 1")
        return np.array([w / r])
    if n % 2 == 0:
        theta = math.acos(min(r, 1.0))
        pts = [np.exp(1j * theta), np.exp(-1j * theta)] * (n // 2)
    else:
        cos_t = (n * r - 1.0) / (n - 1.0)
        theta = math.acos(max(-1.0, min(1.0, cos_t)))
        pts = [1.0 + 0j] + [np.exp(1j * theta), np.exp(-1j * theta)] * ((n - 1) // 2)
    return np.exp(1j * arg(w)) * np.array(pts, dtype=complex)



def two_eigenvalue_search(A, splits: int = 100, phases: int = 100, seed: int = 0) -> dict:
    """Smallest ``|tr(AU)|`` over a grid of two-eigenvalue unitaries.

    ``U = P + e^{i d} (I - P)`` up to a global phase, which leaves the modulus
    unchanged.  ``splits`` projections ``P`` cycle through ranks ``1..n-1``
    with Haar-rotated frames; ``d`` runs over ``phases`` equispaced angles.
    Also returns the exact minimum: ``phi(P)`` over rank-``r`` projections
    fills the interval between the sums of the ``r`` smallest and ``r``
    largest weights, and the modulus is smallest at ``d = pi``.
    """
    from .linalg import haar_unitary

    s = DensityState.from_matrix(A)
    n = s.n
    if n < 2:
        raise DimensionTooSmall("need n >= 2")
    c = np.sort(s.weights)
    d = np.exp(1j * 2 * np.pi * np.arange(phases) / phases)
    best = math.inf
    for i in range(splits):
        r = 1 + i % (n - 1)
        W = haar_unitary(n, seed + i)[:, :r]
        p = float(np.real(np.trace(W.conj().T @ s.A @ W)))
        best = min(best, float(np.min(np.abs(p + d * (1.0 - p)))))
    exact = math.inf
    for r in range(1, n):
        lo, hi = float(c[:r].sum()), float(c[::-1][:r].sum())
        gap = 0.0 if lo <= 0.5 <= hi else min(abs(lo - 0.5), abs(hi - 0.5))
        exact = min(exact, 2.0 * gap)
    return {"n": n, "grid_points": splits * phases, "grid_min_modulus": best, "exact_min_modulus": exact}
