"""Desk-scale acceptance suite: one test per criterion, each printing a
single PASS/FAIL line (collected again in the terminal summary)."""

import math
import time

import numpy as np

from conftest import random_complex, random_density, random_target, record
from ncavg.errors import Infeasible
from ncavg.extreme import general_extreme_solve, kyfan_attainer, kyfan_dual_norm, kyfan_extreme_solve, parse_norm
from ncavg.infdim import INF, NormalState, dyadic_ladder, finite_rank_projection_solve, projection_apply
from ncavg.linalg import eigenphase_clusters, unitarity_residual
from ncavg.sampling import coverage, sample_range
from ncavg.states import DensityState, normalize_functional
from ncavg.unitary import commutative_average, rank_one_annihilator, solve_functional_unitary, solve_state_unitary


def np_haar(n, count, rng):
    # oracle sampler independent of the package: numpy QR with phase fix
    Z = (rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=1, axis2=2)
    return Q * (d / np.abs(d))[:, None, :]


def np_sv(X):
    return np.linalg.svd(X, compute_uv=False)


def test_criterion_1_state_unitaries():
    rng = np.random.default_rng(101)
    cases = []
    for _ in range(500):
        n = int(rng.integers(2, 13))
        A = random_density(n, rng, int(rng.integers(1, n + 1)))
        cases.append((A, random_target(rng)))
    t0 = time.perf_counter()
    worst_u = worst_t = 0.0
    over_budget = 0
    for A, w in cases:
        U = solve_state_unitary(DensityState.from_matrix(A), w).matrix()
        n = A.shape[0]
        worst_u = max(worst_u, unitarity_residual(U))
        worst_t = max(worst_t, abs(np.trace(A @ U) - w))
        over_budget += eigenphase_clusters(U, 1e-7) > (2 if n % 2 == 0 else 3)
    elapsed = time.perf_counter() - t0
    ok = worst_u <= 1e-9 and worst_t <= 1e-8 and over_budget == 0 and elapsed < 10
    assert record(1, ok, f"500 cases, unitarity {worst_u:.1e}, target {worst_t:.1e}, over budget {over_budget}, {elapsed:.2f}s")


def test_criterion_2_trace_on_m3():
    A = np.eye(3) / 3
    U = solve_state_unitary(DensityState.from_matrix(A), 0).matrix()
    clusters = eigenphase_clusters(U, 1e-7)
    # grid: 100 splits (rank 1 or 2, Haar frame) x 100 relative phases
    rng = np.random.default_rng(202)
    frames = np_haar(3, 100, rng)
    phases = np.exp(2j * np.pi * np.arange(100) / 100)
    best = math.inf
    for i, W in enumerate(frames):
        r = 1 + i % 2
        P = W[:, :r] @ W[:, :r].conj().T
        for d in phases:
            V = P + d * (np.eye(3) - P)
            best = min(best, abs(np.trace(A @ V)))
    ok = clusters == 3 and best > 1e-3
    assert record(2, ok, f"solver clusters {clusters}, min |tr(AU)| over 10^4 two-eigenvalue grid = {best:.4f}")


def test_criterion_3_functionals():
    rng = np.random.default_rng(303)
    worst = worst_u = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 10))
        B = random_complex(n, rng)
        f = normalize_functional(B)
        w = random_target(rng, on_circle=n == 1)
        X = solve_functional_unitary(f, w)
        worst = max(worst, abs(np.trace(f.B @ X) - w))
        worst_u = max(worst_u, unitarity_residual(X))
    ok = worst <= 1e-8 and worst_u <= 1e-9
    assert record(3, ok, f"200 functionals, target {worst:.1e}, unitarity {worst_u:.1e}")


def test_criterion_4_rank_one():
    rng = np.random.default_rng(404)
    worst = worst_n = 0.0
    for i in range(200):
        n = int(rng.integers(2, 10))
        B = random_complex(n, rng)
        if i % 4 == 0:  # include singular functionals
            B = B @ np.diag(rng.integers(0, 2, n).astype(float))
        x, y = rank_one_annihilator(B)
        worst = max(worst, abs(np.vdot(y, B @ x)))
        worst_n = max(worst_n, abs(np.linalg.norm(x) - 1), abs(np.linalg.norm(y) - 1))
    ok = worst <= 1e-12 and worst_n <= 1e-12
    assert record(4, ok, f"200 functionals, |<Bx,y>| {worst:.1e}, norm error {worst_n:.1e}")


def test_criterion_5_kyfan_dual_soundness():
    rng = np.random.default_rng(505)
    excess = -math.inf
    attain = 0.0
    pairs = 0
    for _ in range(50):
        n = int(rng.integers(2, 9))
        B = random_complex(n, rng)
        s = np_sv(B)
        Us = np_haar(n, 5000, rng)
        x = random_complex(n, rng, 5000)
        y = random_complex(n, rng, 5000)
        x /= np.linalg.norm(x, axis=0)
        y /= np.linalg.norm(y, axis=0)
        unit_vals = np.abs(np.einsum("ij,bji->b", B, Us))
        dyad_vals = np.abs(np.einsum("ib,ij,jb->b", y.conj(), B, x))  # tr(B x y^*) = y^* B x
        for k in range(1, n + 1):
            bound = max(s[0], s.sum() / k)
            d = kyfan_dual_norm(B, k)
            attain = max(attain, abs(d - bound))
            sampled = dyad_vals.max() if k == n else max(dyad_vals.max(), unit_vals.max() / k)
            excess = max(excess, sampled - bound)
            E = kyfan_attainer(B, k).matrix
            attain = max(attain, abs(abs(np.trace(B @ E)) - bound), abs(np_sv(E)[:k].sum() - 1))
            pairs += 1
    ok = excess <= 1e-9 and attain <= 1e-9
    assert record(5, ok, f"{pairs} (B, k) pairs x 10^4 samples, max excess {excess:.2e}, attainer error {attain:.1e}")


def test_criterion_6_extreme_points():
    rng = np.random.default_rng(606)
    worst_t = worst_s = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 8))
        B = random_complex(n, rng)
        k = int(rng.integers(1, n + 1))
        for name in (f"kyfan:{k}", "schatten:2", "schatten:3"):
            plugin = parse_norm(name)
            Bn = B / plugin.dual_norm(B)
            w = random_target(rng)
            E = kyfan_extreme_solve(Bn, k, w) if name.startswith("kyfan") else general_extreme_solve(Bn, plugin, w)
            s = np_sv(E.matrix)
            worst_t = max(worst_t, abs(np.trace(Bn @ E.matrix) - w))
            if E.tag == "scaled-unitary":
                worst_s = max(worst_s, np.max(np.abs(s - 1 / k)))
            elif E.tag == "dyad":
                worst_s = max(worst_s, abs(s[0] - 1), s[1])
            else:
                p = float(name.split(":")[1])
                worst_s = max(worst_s, abs(np.sum(s**p) ** (1 / p) - 1))
    ok = worst_t <= 1e-8 and worst_s <= 1e-9
    assert record(6, ok, f"600 solves, target {worst_t:.1e}, structure {worst_s:.1e}")


def _states():
    L = 64
    geo = NormalState([2.0**-j for j in range(1, L + 1)], 2.0**-L)
    z = 1.0 / np.arange(1, L + 1)
    zipf = NormalState((1 - 1e-6) * z / z.sum(), 1e-6)
    lam = np.zeros(L)
    lam[:5] = [0.35, 0.25, 0.2, 0.15, 0.05]
    return {"geometric": geo, "zipf": zipf, "finite-rank": NormalState(lam, 0.0)}


def test_criterion_7_projections():
    worst_v = worst_l = -math.inf
    worst_f = worst_n = 0.0
    finite_ranks = True
    for name, s in _states().items():
        eps = s.tail_mass
        for j in range(128):
            t = j / 128
            P = finite_rank_projection_solve(s, t)
            v, _ = projection_apply(s, P)
            worst_v = max(worst_v, abs(v - t) - eps)
            worst_f = max(worst_f, P.gram_residual())
            finite_ranks &= P.rank < INF
        lad = dyadic_ladder(s, 10)
        for m, (v, nest) in enumerate(zip(lad.values, lad.nesting), start=1):
            worst_l = max(worst_l, abs(v - 2.0**-m) - 10 * (eps + 1e-10))
            worst_n = max(worst_n, nest)
            worst_f = max(worst_f, lad.projections[m - 1].gram_residual())
    ok = worst_v <= 1e-10 and worst_f <= 1e-12 and finite_ranks and worst_l <= 0 and worst_n <= 1e-10
    assert record(
        7,
        ok,
        f"3 states x 128 targets, value excess {worst_v:.1e}, frame {worst_f:.1e}, ladder excess {worst_l:.1e}, nesting {worst_n:.1e}",
    )


def test_criterion_8_disk_coverage():
    state = DensityState.diagonal([0.7, 0.3])
    haar = coverage(sample_range(state, "haar", 100_000, seed=20261016))
    diag = sample_range(state, "diagonal", 100_000, seed=20261016)
    low = int(np.sum(np.abs(diag) < 0.4 - 1e-9))
    ok = haar.coverage >= 0.99 and low == 0
    assert record(8, ok, f"Haar coverage {haar.coverage:.4f} of {haar.cells_inside} cells, diagonal points below 0.4: {low}")


def test_criterion_9_commutative():
    rng = np.random.default_rng(909)
    worst = worst_m = 0.0
    for n in range(2, 11):
        for _ in range(100):
            w = random_target(rng)
            z = commutative_average(n, w)
            worst = max(worst, abs(z.mean() - w))
            worst_m = max(worst_m, np.max(np.abs(np.abs(z) - 1)))
    try:
        commutative_average(1, 0.5)
        raised = False
    except Infeasible:
        raised = True
    ok = worst <= 1e-12 and worst_m <= 1e-12 and raised
    assert record(9, ok, f"900 targets, mean error {worst:.1e}, modulus error {worst_m:.1e}, n=1 rejected: {raised}")
