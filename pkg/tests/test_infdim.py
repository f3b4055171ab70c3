import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncavg.errors import DepthTooLarge, EmptyProjection, InvalidInput, UnreachableTarget
from ncavg.infdim import (
    INF,
    LazyProjection,
    NormalState,
    TailBlocks,
    containment_residual,
    divisibility_solve,
    dyadic_ladder,
    finite_rank_projection_solve,
    half_projection,
    projection_apply,
    unitary_equivalent,
)


def geometric(L=64):
    return NormalState([2.0**-j for j in range(1, L + 1)], 2.0**-L)


def zipf(L=64, eps=1e-6):
    lam = 1.0 / np.arange(1, L + 1)
    return NormalState((1 - eps) * lam / lam.sum(), eps)


def finite(L=64):
    lam = np.zeros(L)
    lam[:4] = [0.4, 0.3, 0.2, 0.1]
    return NormalState(lam, 0.0)


def direct_value(s, P, n=None):
    # oracle: sum_k lam_k ||P v_k||^2 from the dense window
    n = n or s.L
    D = P.dense(n)
    return float(np.sum(s.eigenvalues * np.real(np.diag(D))[: s.L]))


IDENTITY = LazyProjection(cofinite_excluding=())


def test_apply_examples():
    s = geometric()
    assert projection_apply(s, LazyProjection()) == (0.0, 0.0)
    v, b = projection_apply(s, IDENTITY)
    assert abs(v - 1) <= s.tail_mass + 1e-15 and b == s.tail_mass
    v, b = projection_apply(s, LazyProjection((0,), np.ones((1, 1))))
    assert v == 0.5 and b == 0


def test_state_validation():
    with pytest.raises(InvalidInput):
        NormalState([0.2, 0.5], 0.3)
    with pytest.raises(InvalidInput):
        NormalState([0.5, 0.4], 0.2)
    assert NormalState([0.5, 0.25]).tail_mass == 0.25
    s = geometric(8)
    assert NormalState.from_json(s.to_json()).tail_mass == s.tail_mass


def test_unitary_equivalence_examples():
    e1 = LazyProjection((0,), np.ones((1, 1)))
    e2 = LazyProjection((1,), np.ones((1, 1)))
    assert unitary_equivalent(e1, e2)
    assert not unitary_equivalent(e1, LazyProjection((0, 1), np.eye(2)))
    a = LazyProjection(cofinite_excluding=(1,))
    b = LazyProjection(cofinite_excluding=(2, 3))
    assert a.corank == 1 and b.corank == 2 and not unitary_equivalent(a, b)
    assert e1.rank == 1 and e1.corank == INF and a.rank == INF


def test_complement_round_trip():
    for P in (
        LazyProjection((0, 2), np.array([[1.0], [0.0]])),
        LazyProjection(cofinite_excluding=(1, 4)),
        half_projection(geometric(6)),
    ):
        C = P.complement()
        n = max(P.window(), C.window(), 8)
        n = (n + 1) // 2 * 2
        D = P.dense(n)[:n, :n] + C.dense(n)[:n, :n]
        assert np.allclose(D, np.eye(n), atol=1e-12)
        assert P.rank == C.corank and P.corank == C.rank


@pytest.mark.parametrize(
    "lam",
    [[2.0**-j for j in range(1, 11)], [1.0, 0, 0], [0.5, 0.5, 0]],
)
def test_half_projection_examples(lam):
    s = NormalState(lam)
    P = half_projection(s)
    v, b = projection_apply(s, P)
    assert abs(v - 0.5) <= s.tail_mass + 1e-12
    assert abs(direct_value(s, P) + 0.5 * s.tail_mass - v) < 1e-12
    assert unitary_equivalent(P, P.complement())
    assert P.rank == INF and P.corank == INF


def test_point_mass_half_contains_pair_vector():
    P = half_projection(NormalState([1.0, 0.0, 0.0]))
    x = np.zeros(4, dtype=complex)
    x[:2] = 1 / math.sqrt(2)
    assert np.allclose(P.project(x)[:4], x)


def test_reflection_is_unitary_zero():
    # 2P - I on the window is a unitary on which the state vanishes
    s = NormalState([0.4, 0.3, 0.2, 0.1])
    R = half_projection(s).reflection(4)
    assert np.allclose(R @ R.conj().T, np.eye(4), atol=1e-12)
    assert abs(np.sum(s.eigenvalues * np.diag(R).real)) < 1e-12


def test_finite_rank_examples():
    s = geometric()
    P = finite_rank_projection_solve(s, 0.5)
    assert P.rank == 1 and P.support == (0,)
    assert finite_rank_projection_solve(s, 0.0).rank == 0
    P = finite_rank_projection_solve(s, 0.6)
    assert P.rank == 2
    v, _ = projection_apply(s, P)
    assert abs(v - 0.6) < 1e-15
    coeffs = sorted(np.abs(P.frame).ravel()[np.abs(P.frame).ravel() > 0])
    assert np.allclose(coeffs, sorted([1.0, math.sqrt(0.4), math.sqrt(0.6)]))
    with pytest.raises(UnreachableTarget):
        finite_rank_projection_solve(s, 1.0)


def test_finite_rank_random_1000():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        L = int(rng.integers(1, 40))
        eps = float(rng.choice([0.0, 1e-9, 1e-3]))
        lam = np.sort(rng.dirichlet(np.ones(L)))[::-1] * (1 - eps)
        s = NormalState(lam, 1 - lam.sum())
        t = rng.uniform(0, 1 - s.tail_mass)
        P = finite_rank_projection_solve(s, t)
        v, b = projection_apply(s, P)
        assert abs(v - t) <= s.tail_mass + 1e-12
        assert P.gram_residual() <= 1e-12 and P.rank < INF


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 0.999), min_size=2, max_size=20))
def test_monotone_targets_monotone_ranks(ts):
    s = zipf(16, 1e-3)
    ts = sorted(t * (1 - s.tail_mass) for t in ts)
    ranks = [finite_rank_projection_solve(s, t).rank for t in ts]
    assert all(a <= b for a, b in zip(ranks, ranks[1:]))


@pytest.mark.parametrize("make", [geometric, zipf, finite])
def test_interval_coverage_grid(make):
    s = make()
    for j in range(1, 128):
        t = j / 128
        Q = divisibility_solve(s, IDENTITY, t)
        v, _ = projection_apply(s, Q)
        assert abs(v - t) <= s.tail_mass + 1e-10
        assert Q.gram_residual() <= 1e-12 and Q.rank < INF


def test_ladder_examples():
    s = geometric()
    lad = dyadic_ladder(s, 3)
    assert np.allclose(lad.values, [0.5, 0.25, 0.125], atol=3 * (s.tail_mass + 1e-10))
    assert max(lad.nesting) <= 1e-10
    lad = dyadic_ladder(NormalState([1.0, 0.0, 0.0]), 2)
    assert np.allclose(lad.values, [0.5, 0.25], atol=1e-12)
    assert dyadic_ladder(s, 0).projections == []
    with pytest.raises(DepthTooLarge):
        dyadic_ladder(s, 21)


def test_ladder_nesting_direct():
    s = zipf(16, 1e-3)
    lad = dyadic_ladder(s, 5)
    for j, (P, Q) in enumerate(zip(lad.projections, lad.projections[1:])):
        n = Q.window(P.window()) * 2
        DP, DQ = P.dense(n), Q.dense(n)
        m = min(DP.shape[0], DQ.shape[0])
        assert np.linalg.norm(DQ[:m, :m] - DP[:m, :m] @ DQ[:m, :m]) <= 1e-10
        assert containment_residual(P, Q) <= 1e-10


def test_divisibility_examples():
    s = geometric()
    P = LazyProjection(cofinite_excluding=tuple(range(2, 64)))
    Q = divisibility_solve(s, P, 0.25)
    v, _ = projection_apply(s, Q)
    assert abs(v - 0.25) <= s.tail_mass + 1e-10
    assert containment_residual(P, Q) <= 1e-10
    assert divisibility_solve(s, P, 0.0).rank == 0
    Q = divisibility_solve(s, IDENTITY, 0.6)
    assert abs(projection_apply(s, Q)[0] - 0.6) < 1e-12


def test_divisibility_below_ladder_level():
    s = zipf()
    Q3 = dyadic_ladder(s, 3).projections[-1]
    R = divisibility_solve(s, Q3, 0.1)
    assert abs(projection_apply(s, R)[0] - 0.1) <= s.tail_mass + 1e-10
    assert containment_residual(Q3, R) <= 1e-10


def test_divisibility_errors():
    s = finite()
    with pytest.raises(UnreachableTarget):
        divisibility_solve(s, IDENTITY, 1.5)
    with pytest.raises(EmptyProjection):
        divisibility_solve(s, LazyProjection((10,), np.ones((1, 1))), 0.1)
    # a finite-rank parent without zero-mass room has gaps in its values
    P = LazyProjection((0, 1), np.eye(2))
    with pytest.raises(UnreachableTarget):
        divisibility_solve(s, P, 0.2)


def test_projection_json_round_trip():
    s = geometric(8)
    for P in (half_projection(s), finite_rank_projection_solve(s, 0.3), LazyProjection(cofinite_excluding=(1, 2))):
        Q = LazyProjection.from_json(P.to_json())
        assert np.array_equal(Q.frame, P.frame) and Q.support == P.support
        assert projection_apply(s, Q) == projection_apply(s, P)


def test_fresh_index_thread_safe():
    s = geometric(4)
    got = []
    lock = threading.Lock()

    def work():
        mine = [s.fresh_index() for _ in range(200)]
        with lock:
            got.extend(mine)

    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(got)) == 1600 and min(got) >= s.L


def test_tail_blocks_geometry():
    T = TailBlocks(4, np.full((2, 1), 1 / math.sqrt(2)))
    assert T.align(5) == 6 and T.align(3) == 3
    idx, _ = T.block(1)
    assert list(idx) == [6, 7]
