"""Dense complex linear algebra used by every solver.

Hermitian eigendecomposition is done by cyclic Jacobi sweeps.  Rotations are
scheduled in round-robin order so that each round is a set of disjoint
2x2 rotations and can be applied as a single matrix product.  The SVD starts
from the eigenframe of ``A^H A`` and is polished with one-sided Jacobi
(Hestenes) sweeps; the left frame is completed on the kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NoConvergence, NotHermitian, NotSquare, NotUnitary

MAX_SWEEPS = 60
CLUSTER_TOL = 1e-7


@dataclass(frozen=True)
class HermitianEig:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


@dataclass(frozen=True)
class SvdResult:
    """``A = U diag(s) V^H`` with ``s`` descending.

    ``U`` is ``m x m`` and ``V`` is ``n x n``; only the first ``min(m, n)``
    columns of each carry singular values.
    """

    U: np.ndarray
    s: np.ndarray
    V: np.ndarray

    def reconstruct(self) -> np.ndarray:
        r = len(self.s)
        return (self.U[:, :r] * self.s) @ self.V[:, :r].conj().T


def as_matrix(A) -> np.ndarray:
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or 0 in M.shape:
        raise NotSquare(f"expected a non-empty 2-d matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NotSquare("matrix has non-finite entries")
    return M


def as_square(A) -> np.ndarray:
    M = as_matrix(A)
    if M.shape[0] != M.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {M.shape}")
    return M


def fro(A) -> float:
    return float(np.linalg.norm(A))


def unitarity_residual(U) -> float:
    U = np.asarray(U, dtype=complex)
    return fro(U.conj().T @ U - np.eye(U.shape[1]))


@lru_cache(maxsize=None)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Disjoint index pairs covering every (p, q) once per sweep."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return tuple(rounds)


def _rotation(n, p, q, a, b, c, skip):
    """Unitary J with (J^H M J)[p, q] = 0 for M[p,p]=a, M[q,q]=b, M[p,q]=c."""
    mag = np.abs(c)
    phase = np.exp(-1j * np.angle(c))
    theta = 0.5 * np.arctan2(2.0 * mag, b - a)
    cs, sn = np.cos(theta), np.sin(theta)
    cs = np.where(skip, 1.0, cs)
    sn = np.where(skip, 0.0, sn)
    phase = np.where(skip, 1.0, phase)
    J = np.eye(n, dtype=complex)
    J[p, p] = cs
    J[p, q] = sn
    J[q, p] = -phase * sn
    J[q, q] = phase * cs
    return J


def _off(A) -> float:
    return fro(A - np.diag(A.diagonal()))


def hermitian_eig(A, max_sweeps: int = MAX_SWEEPS) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi.

    Eigenvalues are returned in descending order; ties keep their original
    diagonal position.

    Raises
    ------
    NotHermitian
        if ``||A - A^H||_F > 1e-12 (1 + ||A||_F)``.
    NoConvergence
        if the off-diagonal mass does not fall below ``1e-12 ||A||_F``.
    """
    A = as_square(A)
    nrm = fro(A)
    if fro(A - A.conj().T) > 1e-12 * (1.0 + nrm):
        raise NotHermitian("matrix is not self-adjoint")
    n = A.shape[0]
    M = 0.5 * (A + A.conj().T)
    V = np.eye(n, dtype=complex)
    target = 1e-12 * nrm
    skip_below = 1e-18 * nrm
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        if _off(M) <= target:
            break
        for p, q in rounds:
            c = M[p, q]
            skip = np.abs(c) <= skip_below
            if np.all(skip):
                continue
            J = _rotation(n, p, q, M[p, p].real, M[q, q].real, c, skip)
            M = J.conj().T @ M @ J
            V = V @ J
    else:
        if _off(M) > target:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    vals = M.diagonal().real.copy()
    order = np.argsort(-vals, kind="stable")
    return HermitianEig(vals[order], V[:, order])


def _complete_frame(Q: np.ndarray, m: int) -> np.ndarray:
    """Extend the orthonormal columns of ``Q`` (m x r) to an m x m unitary."""
    cols = [Q[:, j] for j in range(Q.shape[1])]
    basis = np.eye(m, dtype=complex)
    while len(cols) < m:
        F = np.column_stack(cols) if cols else np.zeros((m, 0), dtype=complex)
        R = basis - F @ (F.conj().T @ basis)
        R = R - F @ (F.conj().T @ R)
        norms = np.linalg.norm(R, axis=0)
        j = int(np.argmax(norms))
        v = R[:, j] / norms[j]
        if cols:
            v = v - F @ (F.conj().T @ v)
            v = v / np.linalg.norm(v)
        cols.append(v)
    return np.column_stack(cols)


def orthonormalize(X) -> np.ndarray:
    """Modified Gram-Schmidt with one reorthogonalization pass.

    Returns ``Q`` with the same column span as ``X`` and ``R = Q^H X`` upper
    triangular with a positive real diagonal.  Columns must be independent.
    """
    X = as_matrix(X)
    m, k = X.shape
    Q = np.zeros((m, k), dtype=complex)
    for j in range(k):
        v = X[:, j].copy()
        for _ in range(2):
            for i in range(j):
                v -= Q[:, i] * np.vdot(Q[:, i], v)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            raise NoConvergence("columns are linearly dependent")
        Q[:, j] = v / nv
    return Q


def _hestenes(B, V, max_sweeps):
    n = B.shape[1]
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        worst = 0.0
        for p, q in rounds:
            bp, bq = B[:, p], B[:, q]
            a = np.sum(np.abs(bp) ** 2, axis=0)
            b = np.sum(np.abs(bq) ** 2, axis=0)
            c = np.sum(bp.conj() * bq, axis=0)
            scale = np.sqrt(a * b)
            rel = np.where(scale > 0, np.abs(c) / np.where(scale > 0, scale, 1.0), 0.0)
            skip = rel <= 1e-15
            if rel.size:
                worst = max(worst, float(rel.max()))
            if np.all(skip):
                continue
            J = _rotation(n, p, q, a, b, c, skip)
            B = B @ J
            V = V @ J
        if worst <= 1e-15:
            return B, V
    raise NoConvergence(f"one-sided Jacobi did not converge in {max_sweeps} sweeps")


def svd(A, max_sweeps: int = MAX_SWEEPS) -> SvdResult:
    A = as_matrix(A)
    m, n = A.shape
    if m < n:
        r = svd(A.conj().T, max_sweeps)
        return SvdResult(r.V, r.s, r.U)
    gram = hermitian_eig(A.conj().T @ A, max_sweeps)
    B, V = _hestenes(A @ gram.eigenvectors, gram.eigenvectors, max_sweeps)
    s = np.linalg.norm(B, axis=0)
    order = np.argsort(-s, kind="stable")
    s, B, V = s[order], B[:, order], V[:, order]
    cutoff = max(m, n) * np.finfo(float).eps * (s[0] if n else 0.0)
    keep = s > cutoff
    r = int(np.count_nonzero(keep))
    U = _complete_frame(B[:, :r] / s[:r], m)
    return SvdResult(U, s, V)


def singular_values(A) -> np.ndarray:
    return svd(A).s


def polar_decompose(B) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(U, P)`` with ``B = U P``, ``U`` unitary and ``P = |B|``.

    On the kernel of a singular ``B`` the unitary factor is completed from the
    SVD frames, so ``U`` is always a full unitary.
    """
    B = as_square(B)
    r = svd(B)
    U = r.U @ r.V.conj().T
    P = (r.V * r.s) @ r.V.conj().T
    return U, 0.5 * (P + P.conj().T)


def unitary_eig(U, tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Eigenphases in ``(-pi, pi]`` and an orthonormal eigenframe of a unitary.

    A unitary is normal, so any Hermitian element of the algebra it generates
    shares its eigenvectors.  We diagonalize ``Re(e^{-ib} U)`` for a few
    incommensurate angles ``b`` and keep the first frame that diagonalizes
    ``U`` itself (a bad ``b`` folds two eigenphases onto one cosine).
    """
    U = as_square(U)
    n = U.shape[0]
    if unitarity_residual(U) > 1e-8:
        raise NotUnitary("matrix is not unitary")
    best = None
    for beta in (1.0, 2.414213562373095, 0.3819660112501051, 5.0):
        rot = np.exp(-1j * beta) * U
        H = 0.5 * (rot + rot.conj().T)
        W = hermitian_eig(H).eigenvectors
        D = W.conj().T @ U @ W
        off = _off(D)
        if best is None or off < best[0]:
            best = (off, W, D)
        if off <= tol * max(1.0, math.sqrt(n)):
            break
    off, W, D = best
    if off > 1e-6:
        raise NoConvergence("could not diagonalize unitary")
    return np.angle(D.diagonal()), W


def eigenphase_clusters(U, tol: float = CLUSTER_TOL) -> int:
    """Number of distinct eigenvalue clusters of a unitary on the circle."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    U = as_square(U)
    if unitarity_residual(U) > 1e-8:
        raise NotUnitary("matrix is not unitary")
    phases, _ = unitary_eig(U)
    return count_phase_clusters(phases, tol)


def count_phase_clusters(phases, tol: float = CLUSTER_TOL) -> int:
    theta = np.sort(np.mod(np.asarray(phases, dtype=float), 2 * np.pi))
    if theta.size <= 1:
        return int(theta.size)
    gaps = np.diff(np.append(theta, theta[0] + 2 * np.pi))
    splits = int(np.count_nonzero(gaps > tol))
    return max(splits, 1)


def haar_unitary(n: int, seed=None) -> np.ndarray:
    """Haar-distributed ``n x n`` unitary, deterministic per ``seed``.

    Gram-Schmidt leaves the triangular factor with a positive diagonal, which
    is the phase fix that makes the Ginibre orthonormalization Haar.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    return orthonormalize(Z)

