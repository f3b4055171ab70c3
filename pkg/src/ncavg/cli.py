"""Command line front end.

Usage examples::

    ncavg solve-unitary state.json --target 0.3-0.4i
    ncavg solve-functional B.json --target i --output out.json
    ncavg solve-extreme B.json --norm kyfan:2 --target 0.5
    ncavg solve-projection normal.json --target 0.6
    ncavg solve-projection normal.json --dyadic 3
    ncavg sample-range state.json --sampler haar --samples 100000 --seed 7
    ncavg verify out.json state.json
    ncavg commutative-average --n 5 --target 0.3+0.2i

Matrix inputs are JSON: either a bare nested list or ``{"matrix": ...}``
(``{"diagonal": [...]}`` is accepted as a shorthand); entries are numbers or
``[re, im]`` pairs.  Normal states are ``{"eigenvalues": [...],
"tail_mass": eps}``.

Exit codes: 0 pass, 1 verification failure, 2 invalid input, 3 infeasible
target, 4 convergence failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import certify, jsonio
from .errors import Infeasible, InvalidInput, NcavgError, NoConvergence
from .extreme import general_extreme_solve, kyfan_extreme_solve, parse_norm
from .infdim import (
    LazyProjection,
    NormalState,
    divisibility_solve,
    dyadic_ladder,
    finite_rank_projection_solve,
    projection_apply,
)
from .linalg import CLUSTER_TOL, as_square, svd
from .sampling import SAMPLERS, coverage, sample_range, to_csv
from .states import DensityState, TraceFunctional
from .unitary import (
    as_target,
    commutative_average,
    rank_one_annihilator,
    solve_functional_unitary,
    solve_state_unitary,
    two_eigenvalue_search,
)

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_CONVERGENCE = 0, 1, 2, 3, 4


def _read_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc}") from None
    return jsonio.loads(text)


def _matrix_from(data) -> np.ndarray:
    if isinstance(data, dict):
        if "matrix" in data:
            return as_square(jsonio.decode_matrix(data["matrix"]))
        if "diagonal" in data:
            return np.diag(jsonio.decode_vector(data["diagonal"]))
        raise InvalidInput("expected a 'matrix' or 'diagonal' key")
    return as_square(jsonio.decode_matrix(data))


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _state_input(A: np.ndarray, strict: bool) -> tuple[DensityState, float]:
    tr = float(np.trace(A).real)
    if abs(tr - 1.0) > 1e-10:
        if strict:
            raise InvalidInput(f"density has trace {tr!r}; --strict forbids rescaling")
        if tr <= 0:
            raise InvalidInput("density must have positive trace")
        return DensityState.from_matrix(A / tr), tr
    return DensityState.from_matrix(A), 1.0


def _functional_input(B: np.ndarray, strict: bool) -> tuple[np.ndarray, float]:
    scale = float(svd(B).s.sum())
    if scale <= 1e-14:
        raise InvalidInput("functional is zero")
    if abs(scale - 1.0) > 1e-10:
        if strict:
            raise InvalidInput(f"functional has trace norm {scale!r}; --strict forbids rescaling")
        return B / scale, scale
    return B, 1.0


def _finish(payload: dict, cert: certify.Certificate, output: str | None) -> int:
    payload["certificate"] = cert.to_json()
    _emit(jsonio.dumps(payload), output)
    return EXIT_OK if cert.passed else EXIT_VERIFY


def cmd_solve_unitary(args, mode: str | None = None) -> int:
    mode = mode or args.mode
    M = _matrix_from(_read_json(args.input))
    w = as_target(jsonio.parse_complex(args.target))
    if mode == "state":
        state, scale = _state_input(M, args.strict)
        U = solve_state_unitary(state, w)
        X = U.matrix()
        cert = certify.certify_state_unitary(state.A, X, w, args.tol)
        payload = {"construction": "state-unitary", "eigenphases": [float(t) for t in U.eigenphases]}
    else:
        B, scale = _functional_input(M, args.strict)
        X = solve_functional_unitary(TraceFunctional.from_matrix(B), w)
        cert = certify.certify_functional_unitary(B, X, w)
        payload = {"construction": "functional-unitary"}
    payload.update(
        n=X.shape[0], target=jsonio.encode_complex(w), matrix=jsonio.encode_matrix(X), input_scale=scale, rescaled=scale != 1.0
    )
    return _finish(payload, cert, args.output)


def cmd_rank_one(args) -> int:
    B = _matrix_from(_read_json(args.input))
    x, y = rank_one_annihilator(B)
    cert = certify.certify_rank_one(B, x, y)
    payload = {"construction": "rank-one-annihilator", "n": B.shape[0], "x": jsonio.encode_vector(x), "y": jsonio.encode_vector(y)}
    return _finish(payload, cert, args.output)


def _extreme_input(B: np.ndarray, norm: str, strict: bool):
    plugin = parse_norm(norm)
    scale = plugin.dual_norm(B)
    if scale <= 1e-14:
        raise InvalidInput("functional is zero")
    if abs(scale - 1.0) > 1e-9:
        if strict:
            raise InvalidInput(f"dual norm is {scale!r}; --strict forbids rescaling")
        return plugin, B / scale, scale
    return plugin, B, 1.0


def cmd_solve_extreme(args) -> int:
    B = _matrix_from(_read_json(args.input))
    w = as_target(jsonio.parse_complex(args.target))
    plugin, Bn, scale = _extreme_input(B, args.norm, args.strict)
    if plugin.name.startswith("kyfan:"):
        E = kyfan_extreme_solve(Bn, int(plugin.name.split(":")[1]), w)
    else:
        E = general_extreme_solve(Bn, plugin, w)
    cert = certify.certify_extreme(Bn, E.matrix, plugin, w, E.tag)
    payload = {
        "construction": "extreme-point",
        "norm": plugin.name,
        "tag": E.tag,
        "n": B.shape[0],
        "target": jsonio.encode_complex(w),
        "matrix": jsonio.encode_matrix(E.matrix),
        "input_scale": scale,
        "rescaled": scale != 1.0,
    }
    if scale != 1.0:
        payload["warning"] = f"functional rescaled by 1/{scale!r} to dual norm 1"
    return _finish(payload, cert, args.output)


def cmd_solve_projection(args) -> int:
    state = NormalState.from_json(_read_json(args.input))
    if args.dyadic is not None and (args.target is not None or args.below is not None):
        raise InvalidInput("--dyadic excludes --target and --below")
    if args.dyadic is None and args.target is None:
        raise InvalidInput("give --target t, --dyadic m, or --below P --target t")
    payload = {"construction": "projection", "state": state.to_json()}
    certs = []
    if args.dyadic is not None:
        ladder = dyadic_ladder(state, args.dyadic)
        projections = ladder.projections
        parents = [None] + projections[:-1]
        targets = [2.0 ** -(j + 1) for j in range(len(projections))]
        payload["mode"] = "dyadic"
        for j, (P, parent, t) in enumerate(zip(projections, parents, targets)):
            certs.append(certify.certify_projection(state, P, t, parent, slack=(j + 1) * certify.PROJECTION_SLACK))
    else:
        t = float(args.target)
        if not math.isfinite(t):
            raise InvalidInput("target must be finite")
        if args.below is not None:
            parent = LazyProjection.from_json(_read_json(args.below))
            P = divisibility_solve(state, parent, t)
            payload["mode"] = "below"
            payload["parent"] = parent.to_json()
        else:
            parent = None
            P = finite_rank_projection_solve(state, t)
            payload["mode"] = "target"
        projections, targets = [P], [t]
        certs.append(certify.certify_projection(state, P, t, parent))
    values = [projection_apply(state, P) for P in projections]
    payload.update(
        targets=targets,
        projections=[P.to_json() for P in projections],
        values=[v for v, _ in values],
        bounds=[b for _, b in values],
        ranks=[P.rank for P in projections],
    )
    cert = _merge(certs)
    return _finish(payload, cert, args.output)


def _merge(certs: list[certify.Certificate]) -> certify.Certificate:
    out = certify.Certificate("projection")
    for c in certs:
        for name in ("target_residual", "containment_residual", "frame_residual", "error_bound"):
            v = getattr(c, name)
            if v is not None:
                cur = getattr(out, name)
                setattr(out, name, v if cur is None else max(cur, v))
        out.failures.extend(c.failures)
    return out


def cmd_sample_range(args) -> int:
    A = _matrix_from(_read_json(args.input))
    state, _ = _state_input(A, args.strict)
    pts = sample_range(state, args.sampler, args.samples, args.seed, args.workers)
    stats = coverage(pts).to_json()
    stats.update(sampler=args.sampler, seed=args.seed)
    _emit(to_csv(pts), args.output)
    text = jsonio.dumps(stats)
    if args.stats:
        Path(args.stats).write_text(text, encoding="utf-8")
    else:
        sys.stderr.write(text)
    return EXIT_OK


def cmd_commutative_average(args) -> int:
    w = as_target(jsonio.parse_complex(args.target))
    pts = commutative_average(args.n, w)
    cert = certify.certify_average(pts, w)
    payload = {"construction": "commutative-average", "n": args.n, "target": jsonio.encode_complex(w), "points": jsonio.encode_vector(pts)}
    return _finish(payload, cert, args.output)


def cmd_two_eigenvalue(args) -> int:
    A = _matrix_from(_read_json(args.input))
    state, _ = _state_input(A, args.strict)
    result = two_eigenvalue_search(state.A, args.splits, args.phases, args.seed)
    _emit(jsonio.dumps(result), args.output)
    return EXIT_OK


def _dims(M: np.ndarray, n: int) -> None:
    if M.shape[0] != n:
        raise InvalidInput(f"dimension mismatch: construction is {M.shape[0]}, input is {n}")


def verify(construction: dict, original, tol: float = CLUSTER_TOL) -> certify.Certificate:
    """Recompute the certificate of a solver output against its input."""
    if not isinstance(construction, dict) or "construction" not in construction:
        raise InvalidInput("not a construction document")
    kind = construction["construction"]
    if kind == "commutative-average":
        pts = jsonio.decode_vector(construction["points"])
        if len(pts) != int(construction["n"]):
            raise InvalidInput("point count does not match n")
        return certify.certify_average(pts, jsonio.parse_complex(construction["target"]))
    if original is None:
        raise InvalidInput(f"verifying {kind!r} needs the original input")
    if kind == "projection":
        state = NormalState.from_json(original)
        projections = [LazyProjection.from_json(p) for p in construction["projections"]]
        targets = construction["targets"]
        if len(targets) != len(projections):
            raise InvalidInput("targets and projections differ in length")
        if construction.get("mode") == "dyadic":
            parents = [None] + projections[:-1]
            certs = [
                certify.certify_projection(state, P, t, parent, slack=(j + 1) * certify.PROJECTION_SLACK)
                for j, (P, parent, t) in enumerate(zip(projections, parents, targets))
            ]
        else:
            parent = LazyProjection.from_json(construction["parent"]) if construction.get("mode") == "below" else None
            certs = [certify.certify_projection(state, P, t, parent) for P, t in zip(projections, targets)]
        return _merge(certs)
    M = _matrix_from(original)
    n = M.shape[0]
    if kind == "rank-one-annihilator":
        x, y = jsonio.decode_vector(construction["x"]), jsonio.decode_vector(construction["y"])
        if len(x) != n or len(y) != n:
            raise InvalidInput("vector length does not match the input dimension")
        return certify.certify_rank_one(M, x, y)
    X = as_square(jsonio.decode_matrix(construction["matrix"]))
    _dims(X, n)
    w = jsonio.parse_complex(construction["target"])
    if kind == "state-unitary":
        state, _ = _state_input(M, strict=False)
        return certify.certify_state_unitary(state.A, X, w, tol)
    if kind == "functional-unitary":
        B, _ = _functional_input(M, strict=False)
        return certify.certify_functional_unitary(B, X, w)
    if kind == "extreme-point":
        plugin, Bn, _ = _extreme_input(M, construction["norm"], strict=False)
        return certify.certify_extreme(Bn, X, plugin, w, construction["tag"])
    raise InvalidInput(f"unknown construction {kind!r}")


def cmd_verify(args) -> int:
    construction = _read_json(args.construction)
    original = _read_json(args.input) if args.input else None
    cert = verify(construction, original, args.tol)
    _emit(jsonio.dumps(cert.to_json()), args.output)
    return EXIT_OK if cert.passed else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ncavg", description="Constructive solvers for state values on unitaries, extreme points and projections.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, target=True):
        p.add_argument("--output", default=None, help="write the result here instead of stdout")
        p.add_argument("--tol", type=float, default=CLUSTER_TOL, help="eigenphase cluster tolerance (radians)")
        p.add_argument("--strict", action="store_true", help="reject inputs that need rescaling")
        p.add_argument("--seed", type=int, default=0)
        if target:
            p.add_argument("--target", default="0", help='complex target such as "0.3-0.4i"')

    p = sub.add_parser("solve-unitary", help="unitary with few eigenvalues hitting a target")
    p.add_argument("input")
    p.add_argument("--mode", choices=("state", "functional"), default="state")
    common(p)
    p.set_defaults(func=cmd_solve_unitary)

    p = sub.add_parser("solve-functional", help="unitary X0 with tr(B X0) = w")
    p.add_argument("input")
    common(p)
    p.set_defaults(func=lambda a: cmd_solve_unitary(a, "functional"))

    p = sub.add_parser("solve-rank-one-zero", help="unit x, y with <Bx, y> = 0")
    p.add_argument("input")
    common(p, target=False)
    p.set_defaults(func=cmd_rank_one)

    p = sub.add_parser("solve-extreme", help="extreme point of a norm ball hitting a target")
    p.add_argument("input")
    p.add_argument("--norm", required=True, help="kyfan:k or schatten:p")
    common(p)
    p.set_defaults(func=cmd_solve_extreme)

    p = sub.add_parser("solve-projection", help="projections for a normal state")
    p.add_argument("input")
    p.add_argument("--target", default=None, type=float)
    p.add_argument("--dyadic", default=None, type=int)
    p.add_argument("--below", default=None, help="projection JSON to divide")
    common(p, target=False)
    p.set_defaults(func=cmd_solve_projection)

    p = sub.add_parser("sample-range", help="Monte Carlo samples of phi(U)")
    p.add_argument("input")
    p.add_argument("--sampler", choices=SAMPLERS, default="haar")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--stats", default=None, help="write coverage statistics JSON here (default: stderr)")
    common(p, target=False)
    p.set_defaults(func=cmd_sample_range)

    p = sub.add_parser("verify", help="recompute the certificate of a construction")
    p.add_argument("construction")
    p.add_argument("input", nargs="?", default=None)
    common(p, target=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("search-two-eigenvalue", help="experiment: closest approach to 0 with two eigenvalues")
    p.add_argument("input")
    p.add_argument("--splits", type=int, default=100)
    p.add_argument("--phases", type=int, default=100)
    common(p, target=False)
    p.set_defaults(func=cmd_two_eigenvalue)

    p = sub.add_parser("commutative-average", help="n unimodular points with mean w")
    p.add_argument("--n", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_commutative_average)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NoConvergence as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (InvalidInput, NcavgError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (KeyError, TypeError, ValueError) as exc:
        print(f"invalid input: {exc!r}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
