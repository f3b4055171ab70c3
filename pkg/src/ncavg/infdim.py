"""Projections for normal states on an infinite-dimensional Hilbert space.

A normal state is stored through its density operator: a finite descending
prefix of eigenvalues plus the tail mass ``eps`` that the prefix misses.
The eigenbasis is indexed by the naturals (0-based); indices ``>= L`` are
tail directions whose individual masses are unknown but sum to ``eps``.
Every reported state value therefore carries an explicit error bound.

Projections are stored lazily as a finite orthonormal frame over explicit
basis indices plus at most one infinite part:

* ``cofinite_excluding=X``: every basis vector whose index is not in ``X``;
* ``tail=TailBlocks(start, pattern)``: for each block of ``size`` consecutive
  indices from ``start`` on, the columns of ``pattern`` placed on that block.

Only normal states are representable.  States that vanish on all finite-rank
projections (lifts of states on the Calkin algebra) have no such density and
are out of reach; for them finite-rank projections cannot reach ``[0, 1)``.
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import DepthTooLarge, EmptyProjection, InvalidInput, UnreachableTarget
from .linalg import _complete_frame, hermitian_eig

INF = math.inf
MAX_LADDER_DEPTH = 20
SQRT1_2 = 1.0 / math.sqrt(2.0)


class NormalState:
    """Density ``sum_j lam_j v_j v_j^*`` truncated to a stored prefix.

    The only mutable part is the fresh-index allocator, a locked counter
    that hands out tail directions (indices ``>= L``) treated as carrying
    zero mass.
    """

    def __init__(self, eigenvalues, tail_mass: float | None = None):
        lam = np.asarray(eigenvalues, dtype=float).reshape(-1)
        if lam.size == 0:
            raise InvalidInput("need at least one stored eigenvalue")
        if not np.all(np.isfinite(lam)) or np.any(lam < 0):
            raise InvalidInput("eigenvalues must be finite and non-negative")
        if np.any(np.diff(lam) > 0):
            raise InvalidInput("eigenvalues must be sorted descending")
        total = float(lam.sum())
        if tail_mass is None:
            tail_mass = max(0.0, 1.0 - total)
        tail_mass = float(tail_mass)
        if -1e-12 <= tail_mass < 0:
            tail_mass = 0.0  # rounding in the caller's 1 - sum
        if tail_mass < 0 or abs(total + tail_mass - 1.0) > 1e-12:
            raise InvalidInput(f"prefix mass {total!r} + tail {tail_mass!r} != 1")
        lam.setflags(write=False)
        self.eigenvalues = lam
        self.tail_mass = tail_mass
        self._counter = itertools.count(lam.size)
        self._lock = threading.Lock()

    @property
    def L(self) -> int:
        return self.eigenvalues.size

    def mass(self, indices) -> np.ndarray:
        idx = np.asarray(indices, dtype=int)
        out = np.zeros(idx.shape)
        inside = idx < self.L
        out[inside] = self.eigenvalues[idx[inside]]
        return out

    def fresh_index(self, avoid=()) -> int:
        avoid = set(avoid)
        with self._lock:
            while True:
                i = next(self._counter)
                if i not in avoid:
                    return i

    def to_json(self) -> dict:
        return {"eigenvalues": self.eigenvalues.tolist(), "tail_mass": self.tail_mass}

    @classmethod
    def from_json(cls, data: dict) -> "NormalState":
        if not isinstance(data, dict) or "eigenvalues" not in data:
            raise InvalidInput("normal state JSON needs an 'eigenvalues' list")
        return cls(data["eigenvalues"], data.get("tail_mass"))


@dataclass(frozen=True, eq=False)
class TailBlocks:
    start: int
    pattern: np.ndarray  # size x p, orthonormal columns

    @property
    def size(self) -> int:
        return self.pattern.shape[0]

    @property
    def per_block(self) -> int:
        return self.pattern.shape[1]

    def block(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        lo = self.start + m * self.size
        return np.arange(lo, lo + self.size), self.pattern

    def align(self, n: int) -> int:
        """Smallest window length >= n that ends on a block boundary."""
        if n <= self.start:
            return n
        return self.start + -(-(n - self.start) // self.size) * self.size


def _uniform(size: int) -> np.ndarray:
    return np.full((size, 1), 1.0 / math.sqrt(size), dtype=complex)


@dataclass(frozen=True, eq=False)
class LazyProjection:
    support: tuple[int, ...] = ()
    frame: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=complex))
    cofinite_excluding: tuple[int, ...] | None = None
    tail: TailBlocks | None = None

    def __post_init__(self):
        F = np.asarray(self.frame, dtype=complex)
        if F.size == 0:
            F = np.zeros((len(self.support), 0), dtype=complex)
        elif F.ndim != 2 or F.shape[0] != len(self.support):
            raise InvalidInput("frame rows must match the support length")
        object.__setattr__(self, "frame", F)
        object.__setattr__(self, "support", tuple(int(i) for i in self.support))
        if len(set(self.support)) != len(self.support):
            raise InvalidInput("frame support has repeated indices")
        if self.cofinite_excluding is not None and self.tail is not None:
            raise InvalidInput("a projection carries at most one infinite part")
        if self.cofinite_excluding is not None:
            X = tuple(sorted(set(int(i) for i in self.cofinite_excluding)))
            object.__setattr__(self, "cofinite_excluding", X)
            if not set(self.support) <= set(X):
                raise InvalidInput("frame must live on the excluded indices")
        if self.tail is not None and self.support and max(self.support) >= self.tail.start:
            raise InvalidInput("frame must live below the tail start")

    @property
    def r(self) -> int:
        return self.frame.shape[1]

    @property
    def rank(self) -> float:
        if self.cofinite_excluding is not None or self.tail is not None:
            return INF
        return self.r

    @property
    def corank(self) -> float:
        if self.cofinite_excluding is not None:
            return len(self.cofinite_excluding) - self.r
        if self.tail is not None:
            if self.tail.size > self.tail.per_block:
                return INF
            return self.tail.start - self.r
        return INF

    def gram_residual(self) -> float:
        return float(np.linalg.norm(self.frame.conj().T @ self.frame - np.eye(self.r)))

    def window(self, n: int = 0) -> int:
        """Window length covering ``n``, the frame and whole tail blocks."""
        n = max([n, *(i + 1 for i in self.support)]) if self.support else n
        if self.cofinite_excluding:
            n = max(n, max(self.cofinite_excluding) + 1)
        if self.tail is not None:
            n = self.tail.align(max(n, self.tail.start))
        return n

    def project(self, x: np.ndarray) -> np.ndarray:
        """``P x`` for ``x`` given densely on indices ``0..len(x)-1``."""
        N = self.window(len(x))
        xs = np.zeros(N, dtype=complex)
        xs[: len(x)] = x
        y = np.zeros(N, dtype=complex)
        if self.r:
            S = np.array(self.support)
            y[S] += self.frame @ (self.frame.conj().T @ xs[S])
        if self.cofinite_excluding is not None:
            keep = np.ones(N, dtype=bool)
            keep[list(self.cofinite_excluding)] = False
            y[keep] += xs[keep]
        if self.tail is not None and N > self.tail.start:
            T = self.tail
            blocks = xs[T.start:N].reshape(-1, T.size)
            coeff = blocks @ T.pattern.conj()
            y[T.start:N] += (coeff @ T.pattern.T).reshape(-1)
        return y

    def basis_in_window(self, n: int) -> np.ndarray:
        """Dense columns spanning ``P`` restricted to the first ``n`` indices.

        Symbolic parts contribute their members that lie fully inside.
        """
        N = self.window(n)
        cols = []
        for c in range(self.r):
            v = np.zeros(N, dtype=complex)
            v[list(self.support)] = self.frame[:, c]
            cols.append(v)
        if self.cofinite_excluding is not None:
            X = set(self.cofinite_excluding)
            for j in range(N):
                if j not in X:
                    v = np.zeros(N, dtype=complex)
                    v[j] = 1.0
                    cols.append(v)
        if self.tail is not None:
            T = self.tail
            for m in range((N - T.start) // T.size):
                idx, pat = T.block(m)
                for c in range(T.per_block):
                    v = np.zeros(N, dtype=complex)
                    v[idx] = pat[:, c]
                    cols.append(v)
        if not cols:
            return np.zeros((N, 0), dtype=complex)
        return np.column_stack(cols)

    def dense(self, n: int) -> np.ndarray:
        B = self.basis_in_window(n)
        return B @ B.conj().T

    def reflection(self, n: int) -> np.ndarray:
        """``2P - I`` on the window; a unitary with state value ``2 phi(P) - 1``."""
        D = self.dense(n)
        return 2.0 * D - np.eye(D.shape[0])

    def complement(self) -> "LazyProjection":
        if self.cofinite_excluding is not None:
            X = self.cofinite_excluding
            F = _embed(self.support, self.frame, X)
            return LazyProjection(X, _complete_frame(F, len(X))[:, self.r:])
        if self.tail is not None:
            low = tuple(range(self.tail.start))
            F = _embed(self.support, self.frame, low)
            comp = _complete_frame(F, len(low))[:, self.r:] if low else np.zeros((0, 0))
            T = self.tail
            rest = _complete_frame(T.pattern, T.size)[:, T.per_block:]
            if rest.shape[1] == 0:
                return LazyProjection(low, comp)
            return LazyProjection(low, comp, tail=TailBlocks(T.start, rest))
        S = self.support
        comp = _complete_frame(self.frame, len(S))[:, self.r:] if S else np.zeros((0, 0))
        return LazyProjection(S, comp, cofinite_excluding=S)

    def to_json(self) -> dict:
        from .jsonio import encode_matrix

        return {
            "support": list(self.support),
            "frame": encode_matrix(self.frame),
            "cofinite_excluding": None if self.cofinite_excluding is None else list(self.cofinite_excluding),
            "tail": None if self.tail is None else {"start": self.tail.start, "pattern": encode_matrix(self.tail.pattern)},
        }

    @classmethod
    def from_json(cls, data: dict) -> "LazyProjection":
        from .jsonio import decode_matrix

        if not isinstance(data, dict):
            raise InvalidInput("projection JSON must be an object")
        support = tuple(data.get("support") or ())
        frame = decode_matrix(data["frame"]) if data.get("frame") else np.zeros((len(support), 0))
        if frame.shape[0] != len(support):
            raise InvalidInput("frame rows must match the support length")
        tail = data.get("tail")
        if tail is not None:
            tail = TailBlocks(int(tail["start"]), decode_matrix(tail["pattern"]))
        P = cls(support, frame, data.get("cofinite_excluding"), tail)
        if P.gram_residual() > 1e-10:
            raise InvalidInput("projection frame is not orthonormal")
        return P


def _embed(support, F, into) -> np.ndarray:
    pos = {j: i for i, j in enumerate(into)}
    out = np.zeros((len(into), F.shape[1]), dtype=complex)
    for row, j in enumerate(support):
        out[pos[j]] = F[row]
    return out


def _sparse_to_projection(vectors) -> LazyProjection:
    """Finite projection spanned by orthonormal sparse vectors ``(idx, coeff)``."""
    if not vectors:
        return LazyProjection()
    support = sorted(set(int(i) for idx, _ in vectors for i in idx))
    pos = {j: i for i, j in enumerate(support)}
    F = np.zeros((len(support), len(vectors)), dtype=complex)
    for c, (idx, coeff) in enumerate(vectors):
        for i, a in zip(idx, coeff):
            F[pos[int(i)], c] += a
    return LazyProjection(tuple(support), F)


def projection_apply(s: NormalState, P: LazyProjection) -> tuple[float, float]:
    """``(value, bound)`` with ``|phi(P) - value| <= bound <= eps``.

    The stored prefix is evaluated exactly.  Tail directions are unknown
    individually, so an infinite part is credited with its share of ``eps``
    (all of it for a cofinite part, ``p/size`` for a block pattern).
    """
    L = s.L
    weight = np.zeros(L)
    for row, j in enumerate(P.support):
        if j < L:
            weight[j] += float(np.sum(np.abs(P.frame[row]) ** 2))
    tail_share = 0.0
    if P.cofinite_excluding is not None:
        keep = np.ones(L, dtype=bool)
        X = [j for j in P.cofinite_excluding if j < L]
        keep[X] = False
        weight[keep] += 1.0
        tail_share = 1.0
    if P.tail is not None:
        T = P.tail
        rowmass = np.sum(np.abs(T.pattern) ** 2, axis=1)
        for j in range(T.start, L):
            weight[j] += rowmass[(j - T.start) % T.size]
        tail_share = T.per_block / T.size
    value = float(np.dot(s.eigenvalues, weight)) + tail_share * s.tail_mass
    touches_tail = tail_share > 0 or any(j >= L for j in P.support)
    return value, (s.tail_mass if touches_tail else 0.0)


def unitary_equivalent(P: LazyProjection, Q: LazyProjection) -> bool:
    """Projections are unitarily equivalent iff ranks and coranks agree."""
    return P.rank == Q.rank and P.corank == Q.corank


def half_projection(s: NormalState, window: int | None = None) -> LazyProjection:
    """Projection with ``phi(P) = 1/2`` and ``P ~ I - P``.

    Basis vectors are paired ``(2j, 2j+1)`` and each pair contributes
    ``(v_2j + v_2j+1)/sqrt 2``, which carries exactly half the pair's mass.
    Pairs past ``window`` (default: ``L`` rounded up to even) are kept
    symbolically as a tail pattern.
    """
    W = s.L + (s.L % 2) if window is None else int(window)
    if W % 2 or W < s.L:
        raise InvalidInput("window must be even and cover the stored prefix")
    F = np.zeros((W, W // 2), dtype=complex)
    for j in range(W // 2):
        F[2 * j, j] = F[2 * j + 1, j] = SQRT1_2
    return LazyProjection(tuple(range(W)), F, tail=TailBlocks(W, _uniform(2)))


def _fill(candidates, room, t: float):
    """Sparse orthonormal vectors whose prefix mass sums to ``t``.

    ``candidates`` are ``(idx, coeff, mass)`` triples, mutually orthogonal
    and diagonal for the state; ``room`` is an extra orthogonal vector of
    zero prefix mass (or ``None``).  Takes the heaviest candidates whole and
    rotates the next one towards a lighter partner to hit ``t`` exactly.
    """
    order = sorted(range(len(candidates)), key=lambda i: -candidates[i][2])
    cands = [candidates[i] for i in order]
    masses = np.array([c[2] for c in cands])
    C = np.concatenate([[0.0], np.cumsum(masses)])
    k = int(np.searchsorted(C, t, side="right")) - 1
    chosen = [(c[0], c[1]) for c in cands[:k]]
    gap = t - C[k]
    if gap <= 1e-15 * max(1.0, t):
        return chosen
    if k >= len(cands):
        raise UnreachableTarget(f"target {t!r} exceeds the available mass {C[-1]!r}")
    nxt = cands[k]
    if room is not None:
        partner, pm = room, 0.0
    elif k + 1 < len(cands) and cands[-1][2] <= gap:
        partner, pm = (cands[-1][0], cands[-1][1]), cands[-1][2]
    else:
        raise UnreachableTarget(f"no sub-projection reaches {t!r}")
    cos2 = (gap - pm) / (nxt[2] - pm)
    c, sn = math.sqrt(min(max(cos2, 0.0), 1.0)), math.sqrt(min(max(1.0 - cos2, 0.0), 1.0))
    idx = np.concatenate([nxt[0], partner[0]])
    coeff = np.concatenate([c * nxt[1], sn * partner[1]])
    chosen.append((idx, coeff))
    return chosen


def finite_rank_projection_solve(s: NormalState, t: float) -> LazyProjection:
    """Finite-rank projection with ``phi(P) = t`` for ``0 <= t < 1 - eps``.

    With prefix sums ``C_k``, take ``v_1..v_k`` for the largest ``C_k <= t``
    and, if needed, ``cos(th) v_{k+1} + sin(th) u`` with ``u`` a fresh tail
    direction and ``cos^2(th) = (t - C_k) / lam_{k+1}``.
    """
    t = float(t)
    if not (0.0 <= t < 1.0 - s.tail_mass):
        raise UnreachableTarget(f"t = {t!r} is outside [0, {1.0 - s.tail_mass!r})")
    one = np.ones(1, dtype=complex)
    cands = [(np.array([j]), one, float(lam)) for j, lam in enumerate(s.eigenvalues)]
    room = (np.array([s.fresh_index()]), one)
    return _sparse_to_projection(_fill(cands, room, t))


def _compressed_eigvectors(s: NormalState, P: LazyProjection):
    """Eigenvectors of the state compressed to the frame of ``P``, heaviest first."""
    if P.r == 0:
        return [], np.zeros(0)
    idx = np.array(P.support)
    M = P.frame.conj().T @ (s.mass(idx)[:, None] * P.frame)
    eig = hermitian_eig(0.5 * (M + M.conj().T))
    G = P.frame @ eig.eigenvectors
    return [(idx, G[:, i]) for i in range(P.r)], np.clip(eig.eigenvalues, 0.0, None)


def divisibility_solve(s: NormalState, P: LazyProjection, t: float) -> LazyProjection:
    """Finite-rank ``Q <= P`` with ``phi(Q) = t`` for ``0 <= t <= phi(P) - eps``.

    The state is compressed to ``P``: the frame is re-diagonalized, and the
    infinite part contributes its prefix members as candidates and a fresh
    zero-mass member as room for the final rotation.  For a finite-rank
    ``P`` without zero-mass room some targets are unreachable (the values of
    sub-projections then have gaps) and :class:`UnreachableTarget` is raised.
    """
    t = float(t)
    value, _ = projection_apply(s, P)
    if t < 0.0:
        raise UnreachableTarget("target must be non-negative")
    if t == 0.0:
        return LazyProjection()
    if value <= s.tail_mass:
        raise EmptyProjection("projection carries no resolvable mass")
    if t > value - s.tail_mass + 1e-15:
        raise UnreachableTarget(f"t = {t!r} exceeds phi(P) - eps = {value - s.tail_mass!r}")
    vecs, mu = _compressed_eigvectors(s, P)
    cands = [(idx, g, float(m)) for (idx, g), m in zip(vecs, mu)]
    one = np.ones(1, dtype=complex)
    room = None
    if P.cofinite_excluding is not None:
        X = set(P.cofinite_excluding)
        cands += [(np.array([j]), one, float(s.eigenvalues[j])) for j in range(s.L) if j not in X]
        room = (np.array([s.fresh_index(avoid=X | set(range(s.L)))]), one)
    elif P.tail is not None:
        T = P.tail
        m = 0
        while T.start + m * T.size < s.L:
            idx, pat = T.block(m)
            for c in range(T.per_block):
                cands.append((idx, pat[:, c], float(np.dot(s.mass(idx), np.abs(pat[:, c]) ** 2))))
            m += 1
        idx, pat = T.block(m)
        room = (idx, pat[:, 0])
    return _sparse_to_projection(_fill(cands, room, t))


def containment_residual(P: LazyProjection, Q: LazyProjection, extra_blocks: int = 2) -> float:
    """``||(I - P) Q||_F`` over the members of ``Q`` inside the active window."""
    n = Q.window(max(P.window(), 1))
    if Q.tail is not None:
        n = Q.tail.align(n + extra_blocks * Q.tail.size)
    cols = Q.basis_in_window(n)
    total = 0.0
    for c in range(cols.shape[1]):
        v = cols[:, c]
        Pv = P.project(v)
        vv = np.zeros(len(Pv), dtype=complex)
        vv[: len(v)] = v
        total += float(np.sum(np.abs(vv - Pv) ** 2))
    return math.sqrt(total)


@dataclass(frozen=True, eq=False)
class Ladder:
    projections: list[LazyProjection]
    values: list[float]
    bounds: list[float]
    nesting: list[float]


def _halve_within(s: NormalState, Q: LazyProjection) -> LazyProjection:
    vecs, _ = _compressed_eigvectors(s, Q)
    T = Q.tail
    out = []
    for i in range(0, len(vecs) - 1, 2):
        (idx, a), (_, b) = vecs[i], vecs[i + 1]
        out.append((idx, (a + b) * SQRT1_2))
    start = T.start
    if len(vecs) % 2:
        idx, g = vecs[-1]
        bidx, bpat = T.block(0)
        out.append((np.concatenate([idx, bidx]), np.concatenate([g, bpat[:, 0]]) * SQRT1_2))
        start = T.start + T.size
    frame = _sparse_to_projection(out)
    return LazyProjection(frame.support, frame.frame, tail=TailBlocks(start, _uniform(2 * T.size)))


def dyadic_ladder(s: NormalState, depth: int) -> Ladder:
    """Nested projections ``Q_1 >= ... >= Q_m`` with ``phi(Q_j) = 2^-j``.

    ``Q_1`` is :func:`half_projection`; each further level halves the
    previous one against the state compressed to it (re-diagonalized first,
    so the pair vectors carry exactly half the mass).
    """
    if depth < 0 or depth > MAX_LADDER_DEPTH:
        raise DepthTooLarge(f"depth must lie in [0, {MAX_LADDER_DEPTH}]")
    projections, values, bounds, nesting = [], [], [], []
    Q = None
    for j in range(depth):
        nxt = half_projection(s) if Q is None else _halve_within(s, Q)
        if Q is not None:
            nesting.append(containment_residual(Q, nxt))
        else:
            nesting.append(0.0)
        value, bound = projection_apply(s, nxt)
        projections.append(nxt)
        values.append(value)
        bounds.append(bound)
        Q = nxt
    return Ladder(projections, values, bounds, nesting)
