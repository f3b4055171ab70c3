"""States ``X -> tr(AX)`` and general trace functionals ``X -> tr(BX)``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotADensity, NotHermitian, ZeroFunctional
from .linalg import SvdResult, as_square, fro, hermitian_eig, svd

CLAMP = 1e-10


def _pair(A: np.ndarray, X) -> complex:
    X = as_square(X)
    if X.shape != A.shape:
        raise DimensionMismatch(f"operand {X.shape} does not match {A.shape}")
    # tr(AX) without forming the product
    return complex(np.sum(A * X.T))


@dataclass(frozen=True, eq=False)
class DensityState:
    """A state on ``M_n`` given by its density matrix.

    Construction diagonalizes ``A`` once.  Eigenvalues in ``[-1e-10, 0)`` are
    clamped to zero and the trace renormalized, so slightly non-positive
    input round-tripped through text is accepted.  The stored matrix is
    rebuilt from the clamped spectrum.
    """

    A: np.ndarray
    weights: np.ndarray = field(repr=False)
    frame: np.ndarray = field(repr=False)

    @classmethod
    def from_matrix(cls, A, normalize: bool = False) -> "DensityState":
        A = as_square(A)
        if fro(A - A.conj().T) > CLAMP * (1.0 + fro(A)):
            raise NotHermitian("density matrix must be self-adjoint")
        eig = hermitian_eig(0.5 * (A + A.conj().T))
        c = eig.eigenvalues.copy()
        if c[-1] < -CLAMP:
            raise NotADensity(f"density matrix has eigenvalue {c[-1]:.3e} < 0")
        c[c < 0] = 0.0
        total = float(c.sum())
        if total <= 0.0:
            raise NotADensity("density matrix has zero trace")
        if not normalize and abs(total - 1.0) > CLAMP:
            raise NotADensity(f"trace is {total!r}, expected 1")
        c = c / total
        V = eig.eigenvectors
        return cls((V * c) @ V.conj().T, c, V)

    @classmethod
    def diagonal(cls, weights) -> "DensityState":
        return cls.from_matrix(np.diag(np.asarray(weights, dtype=float)))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def __call__(self, X) -> complex:
        return _pair(self.A, X)

    def apply(self, X) -> complex:
        return _pair(self.A, X)

    def conjugate(self, U) -> "DensityState":
        """State ``X -> tr(A U X U^H)``, i.e. density ``U^H A U``."""
        U = as_square(U)
        return DensityState.from_matrix(U.conj().T @ self.A @ U, normalize=True)


def state_apply(s: DensityState, X) -> complex:
    return s.apply(X)


@dataclass(frozen=True, eq=False)
class TraceFunctional:
    """``X -> tr(BX)``; its norm as a functional on ``(M_n, ||.||_op)`` is ``tr|B|``."""

    B: np.ndarray
    trace_norm: float
    sv: SvdResult = field(repr=False)

    @classmethod
    def from_matrix(cls, B) -> "TraceFunctional":
        B = as_square(B)
        r = svd(B)
        return cls(B, float(r.s.sum()), r)

    @property
    def n(self) -> int:
        return self.B.shape[0]

    def __call__(self, X) -> complex:
        return _pair(self.B, X)

    def apply(self, X) -> complex:
        return _pair(self.B, X)


def normalize_functional(B) -> TraceFunctional:
    f = TraceFunctional.from_matrix(B)
    if f.trace_norm <= 1e-14:
        raise ZeroFunctional("functional has zero trace norm")
    scale = f.trace_norm
    sv = SvdResult(f.sv.U, f.sv.s / scale, f.sv.V)
    return TraceFunctional(f.B / scale, float(sv.s.sum()), sv)
