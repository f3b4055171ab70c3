"""Constructive solvers: unitaries with prescribed state values, extreme
points of unitarily invariant norm balls hitting a target, and projections
with prescribed values for normal states on an infinite-dimensional space."""

from .errors import Infeasible, InvalidInput, NcavgError, NoConvergence
from .extreme import ExtremePoint, general_extreme_solve, kyfan_extreme_solve, parse_norm
from .infdim import (
    LazyProjection,
    NormalState,
    divisibility_solve,
    dyadic_ladder,
    finite_rank_projection_solve,
    projection_apply,
)
from .linalg import haar_unitary, hermitian_eig, polar_decompose, svd, unitary_eig
from .states import DensityState, TraceFunctional
from .unitary import (
    SpectralUnitary,
    commutative_average,
    rank_one_annihilator,
    solve_functional_unitary,
    solve_state_unitary,
)

__version__ = "0.1.0"
