"""Numerical certificates for every construction.

Each ``certify_*`` function recomputes residuals from scratch (it never
trusts solver internals) and compares them with the fixed thresholds below.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .extreme import DYAD, SCALED_UNITARY, NormPlugin
from .infdim import LazyProjection, NormalState, containment_residual, projection_apply
from .linalg import CLUSTER_TOL, eigenphase_clusters, singular_values, unitarity_residual

UNITARITY_TOL = 1e-9
TARGET_TOL = 1e-8
NORM_TOL = 1e-9
ANNIHILATOR_TOL = 1e-12
FRAME_TOL = 1e-12
CONTAINMENT_TOL = 1e-10
PROJECTION_SLACK = 1e-10
AVERAGE_TOL = 1e-12


@dataclass
class Certificate:
    construction: str
    unitarity_residual: float | None = None
    cluster_count: int | None = None
    cluster_budget: int | None = None
    target_residual: float | None = None
    norm_residual: float | None = None
    containment_residual: float | None = None
    frame_residual: float | None = None
    error_bound: float | None = None
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def check(self, name: str, value: float, limit: float) -> None:
        if not (value <= limit):
            self.failures.append(f"{name} = {value:.3e} exceeds {limit:.1e}")

    def to_json(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if v is not None}
        out["passed"] = self.passed
        return out


def _pair(B, X) -> complex:
    return complex(np.trace(np.asarray(B) @ np.asarray(X)))


def certify_state_unitary(A, U, w, tol: float = CLUSTER_TOL) -> Certificate:
    n = np.asarray(A).shape[0]
    cert = Certificate("state-unitary")
    cert.unitarity_residual = unitarity_residual(U)
    cert.check("unitarity_residual", cert.unitarity_residual, UNITARITY_TOL)
    cert.target_residual = abs(_pair(A, U) - w)
    cert.check("target_residual", cert.target_residual, TARGET_TOL)
    if cert.unitarity_residual <= 1e-8:
        cert.cluster_count = eigenphase_clusters(U, tol)
        cert.cluster_budget = 1 if n == 1 else (2 if n % 2 == 0 else 3)
        cert.check("cluster_count", cert.cluster_count, cert.cluster_budget)
    return cert


def certify_functional_unitary(B, X, w) -> Certificate:
    cert = Certificate("functional-unitary")
    cert.unitarity_residual = unitarity_residual(X)
    cert.check("unitarity_residual", cert.unitarity_residual, UNITARITY_TOL)
    cert.target_residual = abs(_pair(B, X) - w)
    cert.check("target_residual", cert.target_residual, TARGET_TOL)
    return cert


def certify_rank_one(B, x, y) -> Certificate:
    cert = Certificate("rank-one-annihilator")
    x, y = np.asarray(x, dtype=complex), np.asarray(y, dtype=complex)
    cert.norm_residual = max(abs(np.linalg.norm(x) - 1.0), abs(np.linalg.norm(y) - 1.0))
    cert.check("norm_residual", cert.norm_residual, ANNIHILATOR_TOL)
    cert.target_residual = abs(np.vdot(y, np.asarray(B) @ x))
    cert.check("target_residual", cert.target_residual, ANNIHILATOR_TOL)
    return cert


def certify_extreme(B, E, plugin: NormPlugin, w, tag: str) -> Certificate:
    cert = Certificate("extreme-point")
    cert.norm_residual = abs(plugin.norm(E) - 1.0)
    cert.check("norm_residual", cert.norm_residual, NORM_TOL)
    cert.target_residual = abs(_pair(B, E) - w)
    cert.check("target_residual", cert.target_residual, TARGET_TOL)
    s = singular_values(E)
    if tag == SCALED_UNITARY:
        k = int(plugin.name.split(":")[1]) if plugin.name.startswith("kyfan:") else 1
        cert.check("singular_spread", float(np.max(np.abs(s - 1.0 / k))), NORM_TOL)
    elif tag == DYAD:
        cert.check("sigma1", abs(float(s[0]) - 1.0), NORM_TOL)
        if s.size > 1:
            cert.check("sigma2", float(s[1]), NORM_TOL)
    return cert


def certify_projection(
    s: NormalState, P: LazyProjection, t: float | None, parent: LazyProjection | None = None, slack: float = PROJECTION_SLACK
) -> Certificate:
    cert = Certificate("projection")
    value, bound = projection_apply(s, P)
    cert.error_bound = s.tail_mass
    cert.frame_residual = P.gram_residual()
    cert.check("frame_residual", cert.frame_residual, FRAME_TOL)
    if t is not None:
        cert.target_residual = abs(value - t)
        cert.check("target_residual", cert.target_residual, s.tail_mass + slack)
    if parent is not None:
        cert.containment_residual = containment_residual(parent, P)
        cert.check("containment_residual", cert.containment_residual, CONTAINMENT_TOL)
    return cert


def certify_average(points, w) -> Certificate:
    cert = Certificate("commutative-average")
    z = np.asarray(points, dtype=complex)
    cert.norm_residual = float(np.max(np.abs(np.abs(z) - 1.0)))
    cert.check("norm_residual", cert.norm_residual, AVERAGE_TOL)
    cert.target_residual = abs(complex(z.mean()) - w)
    cert.check("target_residual", cert.target_residual, AVERAGE_TOL)
    return cert
