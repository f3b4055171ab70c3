"""Extreme points of unitarily invariant norm balls hitting a disk target.

Norms are handled through :class:`NormPlugin` objects: a symmetric gauge on
singular values, its dual gauge (the functional norm of ``X -> tr(BX)``), and
an attainer that returns an extreme point ``A0`` with ``tr(B A0) = 1``.
Plugin identifiers are ``"kyfan:k"`` and ``"schatten:p"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BadK, BadP, InvalidInput, NotNormalized
from .linalg import as_square, singular_values, svd, unitary_eig
from .states import normalize_functional
from .unitary import arg, as_target, first_crossing, solve_functional_unitary

SCALED_UNITARY = "scaled-unitary"
DYAD = "dyad"
SPHERE = "sphere"


@dataclass(frozen=True, eq=False)
class ExtremePoint:
    tag: str
    matrix: np.ndarray
    norm_id: str

    def structural_residuals(self, k: int | None = None) -> dict[str, float]:
        """Deviation from the defining shape of the tag.

        Scaled unitaries must have every singular value ``1/k``; dyads must
        have ``s1 = 1`` and ``s2 = 0``.
        """
        s = singular_values(self.matrix)
        if self.tag == SCALED_UNITARY:
            if k is None:
                k = int(self.norm_id.split(":")[1]) if self.norm_id.startswith("kyfan:") else 1
            return {"singular_spread": float(np.max(np.abs(s - 1.0 / k)))}
        if self.tag == DYAD:
            tail = float(s[1]) if s.size > 1 else 0.0
            return {"sigma1": abs(float(s[0]) - 1.0), "sigma2": tail}
        return {}


@dataclass(frozen=True)
class NormPlugin:
    name: str
    gauge: Callable[[np.ndarray], float]
    dual_gauge: Callable[[np.ndarray], float]
    attainer: Callable[[np.ndarray], ExtremePoint]

    def norm(self, X) -> float:
        return self.gauge(singular_values(as_square(X)))

    def dual_norm(self, B) -> float:
        return self.dual_gauge(singular_values(as_square(B)))


def _check_k(n: int, k: int) -> None:
    if not (1 <= k <= n):
        raise BadK(f"k = {k} must lie in [1, {n}]")


def kyfan_norm(X, k: int) -> float:
    """Sum of the ``k`` largest singular values."""
    X = as_square(X)
    _check_k(X.shape[0], k)
    return float(np.sum(singular_values(X)[:k]))


def kyfan_dual_norm(B, k: int) -> float:
    """``max(s1(B), tr|B| / k)``, the sup of ``|tr(BE)|`` over the extreme points."""
    B = as_square(B)
    _check_k(B.shape[0], k)
    s = singular_values(B)
    return max(float(s[0]), float(s.sum()) / k)


def _unitary_branch(n: int, k: int, s: np.ndarray) -> bool:
    # k = n: scaled unitaries are not extreme for the trace norm
    if k == n and n > 1:
        return False
    if k == 1:
        return True
    return float(s.sum()) / k >= float(s[0]) - 1e-12


def kyfan_attainer(B, k: int) -> ExtremePoint:
    """Extreme point of the Ky-Fan ``k`` ball where ``|tr(B .)|`` peaks."""
    B = as_square(B)
    n = B.shape[0]
    _check_k(n, k)
    r = svd(B)
    if _unitary_branch(n, k, r.s):
        Up = r.U @ r.V.conj().T
        return ExtremePoint(SCALED_UNITARY, Up.conj().T / k, f"kyfan:{k}")
    return ExtremePoint(DYAD, np.outer(r.V[:, 0], r.U[:, 0].conj()), f"kyfan:{k}")


def _check_normalized(value: float) -> None:
    if abs(value - 1.0) > 1e-9:
        raise NotNormalized(f"dual norm is {value!r}, expected 1")


def kyfan_extreme_solve(B, k: int, w) -> ExtremePoint:
    """Extreme point ``E`` of the Ky-Fan ``k`` unit ball with ``tr(BE) = w``.

    ``B`` must have Ky-Fan dual norm 1.  The branch is the component of the
    extreme set on which ``|tr(B .)|`` reaches 1: scaled unitaries when
    ``tr|B| / k >= s1(B)`` (ties included), rank-one dyads otherwise.
    """
    B = as_square(B)
    n = B.shape[0]
    _check_k(n, k)
    w = as_target(w)
    r = svd(B)
    _check_normalized(max(float(r.s[0]), float(r.s.sum()) / k))
    norm_id = f"kyfan:{k}"
    if _unitary_branch(n, k, r.s):
        tn = float(r.s.sum())
        f = normalize_functional(B)
        X0 = solve_functional_unitary(f, as_target(k * w / tn))
        return ExtremePoint(SCALED_UNITARY, X0 / k, norm_id)
    x1, y1 = r.V[:, 0], r.U[:, 0]
    Bx = B @ x1
    u = Bx / np.linalg.norm(Bx)
    # unit vector orthogonal to Bx1
    E = np.eye(n, dtype=complex)
    R = E - np.outer(u, u.conj() @ E)
    R = R - np.outer(u, u.conj() @ R)
    j = int(np.argmax(np.linalg.norm(R, axis=0)))
    y_perp = R[:, j] / np.linalg.norm(R[:, j])
    theta = math.acos(min(abs(w), 1.0))
    y = np.exp(-1j * arg(w)) * (math.cos(theta) * y1 + math.sin(theta) * y_perp)
    return ExtremePoint(DYAD, np.outer(x1, y.conj()), norm_id)


def kyfan_plugin(k: int) -> NormPlugin:
    if k < 1:
        raise BadK(f"k = {k} must be >= 1")

    def gauge(s):
        if k > s.size:
            raise BadK(f"k = {k} exceeds n = {s.size}")
        return float(np.sum(s[:k]))

    def dual(s):
        if k > s.size:
            raise BadK(f"k = {k} exceeds n = {s.size}")
        return max(float(s[0]), float(s.sum()) / k)

    return NormPlugin(f"kyfan:{k}", gauge, dual, lambda B: kyfan_attainer(B, k))


def _schatten(s: np.ndarray, p: float) -> float:
    if math.isinf(p):
        return float(s[0])
    top = float(s[0])
    if top == 0.0:
        return 0.0
    return top * float(np.sum((s / top) ** p)) ** (1.0 / p)


def _conjugate_exponent(p: float) -> float:
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def schatten_attainer(B, p: float) -> ExtremePoint:
    """Holder-equality attainer on the Schatten-``p`` sphere.

    For ``B = W diag(s) V^H`` returns ``A0 = V diag(d) W^H`` with
    ``d ~ s^(q-1)`` scaled to ``||A0||_p = 1``; then ``tr(B A0) = ||B||_q``.
    For ``p = 1`` the top singular dyad and for ``p = inf`` the polar
    unitary are returned; both are one choice among several when singular
    values repeat.
    """
    B = as_square(B)
    if not (p >= 1.0):
        raise BadP(f"p = {p} must be >= 1")
    r = svd(B)
    if r.s[0] == 0.0:
        raise InvalidInput("attainer needs a non-zero functional")
    norm_id = f"schatten:{_fmt_p(p)}"
    if p == 1.0:
        return ExtremePoint(DYAD, np.outer(r.V[:, 0], r.U[:, 0].conj()), norm_id)
    if math.isinf(p):
        return ExtremePoint(SCALED_UNITARY, r.V @ r.U.conj().T, norm_id)
    q = _conjugate_exponent(p)
    d = (r.s / r.s[0]) ** (q - 1.0)
    d = d / _schatten(d, p)
    return ExtremePoint(SPHERE, (r.V * d) @ r.U.conj().T, norm_id)


def _fmt_p(p: float) -> str:
    if math.isinf(p):
        return "inf"
    return str(int(p)) if float(p).is_integer() else repr(float(p))


def schatten_plugin(p: float) -> NormPlugin:
    p = float(p)
    if not (p >= 1.0):
        raise BadP(f"p = {p} must be >= 1")
    q = _conjugate_exponent(p)
    return NormPlugin(
        f"schatten:{_fmt_p(p)}",
        lambda s: _schatten(s, p),
        lambda s: _schatten(s, q),
        lambda B: schatten_attainer(B, p),
    )


def parse_norm(name: str) -> NormPlugin:
    """``"kyfan:k"`` or ``"schatten:p"`` (``p`` may be ``inf``)."""
    kind, _, value = name.partition(":")
    if kind == "kyfan":
        try:
            k = int(value)
        except ValueError:
            raise BadK(f"bad Ky-Fan index {value!r}") from None
        return kyfan_plugin(k)
    if kind == "schatten":
        try:
            p = float(value)
        except ValueError:
            raise BadP(f"bad Schatten exponent {value!r}") from None
        return schatten_plugin(p)
    raise InvalidInput(f"unknown norm {name!r}")


def general_extreme_solve(B, plugin: NormPlugin, w) -> ExtremePoint:
    """Extreme point ``E`` of the plugin's unit ball with ``tr(BE) = w``.

    Start from the attainer ``A0`` (value 1) and find a unitary ``U0`` with
    ``tr(B U0 A0) = 0``; that is a zero of the functional ``Y -> tr(A0 B Y)``.
    The left orbit ``{U A0}`` consists of extreme points, so walking the
    spectral path from ``I`` to ``U0`` and bisecting on the modulus, then
    fixing the phase, lands on ``w``.
    """
    B = as_square(B)
    w = as_target(w)
    _check_normalized(plugin.dual_norm(B))
    start = plugin.attainer(B)
    A0 = start.matrix
    C = A0 @ B
    U0 = solve_functional_unitary(normalize_functional(C), 0.0)
    theta, W = unitary_eig(U0)
    diag = np.einsum("ij,jk,ki->i", W.conj().T, C, W)
    value = lambda t: complex(np.sum(diag * np.exp(1j * t * theta)))
    t_star = first_crossing(lambda t: abs(value(t)), abs(w), tol=1e-12)
    beta = arg(w) - arg(value(t_star))
    path = (W * np.exp(1j * (t_star * theta + beta))) @ W.conj().T
    return ExtremePoint(start.tag, path @ A0, plugin.name)

