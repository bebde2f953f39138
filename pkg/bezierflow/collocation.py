"""
Sampling grids and collocation operators.

For local nodes 0 = s_0 < ... < s_D = 1 the collocation matrix B has entries
B[r, c] = b_{c,D}(s_r), so sampling a patch at the nodes is B @ P and fitting a
patch through D+1 samples M is the solve B P = M. Applied patch by patch
(block-diagonal B) these maps are inverse isomorphisms between control nets and
sample matrices of piecewise curves.
"""
import functools
import logging
import os
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import lu_factor, lu_solve

from bezierflow.bezier import (JOIN_TOLERANCE, ControlPolygon, PiecewiseCurve, Point2, bernstein_matrix,
                               evaluate_patch_many, reconcile_joins)
from bezierflow.errors import ArgumentError, DataError, SingularConfigurationError

DEFAULT_MAX_FIT_DEGREE = 10


def max_fit_degree() -> int:
    raw = os.getenv("BEZIERFLOW_MAX_FIT_DEGREE", str(DEFAULT_MAX_FIT_DEGREE))
    try:
        cap = int(raw)
    except ValueError:
        raise ArgumentError(f"BEZIERFLOW_MAX_FIT_DEGREE must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ArgumentError(f"BEZIERFLOW_MAX_FIT_DEGREE must be at least 1, got {cap}")
    return cap


def _check_nodes(nodes: ArrayLike, D: int) -> NDArray[np.float64]:
    nodes = np.array(nodes, dtype=float).reshape(-1)
    if len(nodes) != D + 1:
        raise ArgumentError(f"degree {D} needs {D + 1} nodes, got {len(nodes)}")
    if not np.all(np.isfinite(nodes)):
        raise ArgumentError("nodes must be finite")
    steps = np.diff(nodes)
    if np.any(steps == 0.0):
        raise SingularConfigurationError(f"duplicate collocation nodes {nodes.tolist()}")
    if np.any(steps < 0.0):
        raise ArgumentError(f"collocation nodes must be increasing, got {nodes.tolist()}")
    if nodes[0] != 0.0 or nodes[-1] != 1.0:
        raise ArgumentError(f"collocation nodes must start at 0 and end at 1, got {nodes.tolist()}")
    return nodes


class CollocationOperator:
    """
    The collocation matrix of one degree and node vector, with its LU factorization.
    Immutable once built; instances are shared through a cache.
    """

    degree: int
    nodes: NDArray[np.float64]
    matrix: NDArray[np.float64]
    condition: float

    def __init__(self, nodes: ArrayLike, degree: int):
        self.degree = degree
        self.nodes = _check_nodes(nodes, degree)
        self.nodes.setflags(write=False)
        self.matrix = bernstein_matrix(degree, self.nodes)
        self.matrix.setflags(write=False)
        self.condition = float(np.linalg.cond(self.matrix))
        self._lu = lu_factor(self.matrix)

    def solve(self, rhs: ArrayLike) -> NDArray[np.float64]:
        """
        Solve B X = rhs for X; rhs has D+1 rows
        """
        return lu_solve(self._lu, np.asarray(rhs, dtype=float))

    def apply(self, coefficients: ArrayLike) -> NDArray[np.float64]:
        return self.matrix @ np.asarray(coefficients, dtype=float)

    def inverse(self) -> NDArray[np.float64]:
        return self.solve(np.eye(self.degree + 1))

    def __repr__(self):
        return f"<CollocationOperator degree={self.degree} cond={self.condition:.3g}>"


@functools.lru_cache(maxsize=128)
def _cached_operator(nodes: Tuple[float, ...], degree: int) -> CollocationOperator:
    operator = CollocationOperator(nodes, degree)
    logging.debug(f"Factored collocation matrix for degree {degree} at nodes {list(nodes)} "
                  f"(condition number {operator.condition:.3g})")
    return operator


def collocation_matrix(nodes: ArrayLike, D: int, allow_high_degree: bool = False) -> CollocationOperator:
    """
    Return the (cached) collocation operator for these local nodes.
    Degrees above the fitting cap are refused unless allow_high_degree is set.
    """
    nodes = _check_nodes(nodes, D)
    cap = max_fit_degree()
    if D > cap and not allow_high_degree:
        raise ArgumentError(f"degree {D} is above the fitting cap {cap}; "
                            f"pass allow_high_degree to fit anyway")
    operator = _cached_operator(tuple(float(s) for s in nodes), D)
    if D > cap:
        logging.warning(f"Fitting with degree {D} above the cap {cap}: "
                        f"collocation condition number {operator.condition:.3g}")
    return operator


class SamplingGrid:
    """
    The subdivision used to sample a piecewise curve: patch_count patches of degree D,
    each sampled at the same local nodes. Global node (i, j) is (i + s_j) / patch_count,
    so the last node of patch i and the first node of patch i+1 coincide.
    """

    patch_count: int
    degree: int
    local_nodes: NDArray[np.float64]
    allow_high_degree: bool

    def __init__(self, patch_count: int, degree: int, local_nodes: ArrayLike,
                 allow_high_degree: bool = False):
        if isinstance(patch_count, bool) or not isinstance(patch_count, (int, np.integer)) or patch_count < 1:
            raise ArgumentError(f"patch count must be a positive integer, got {patch_count!r}")
        if isinstance(degree, bool) or not isinstance(degree, (int, np.integer)) or degree < 1:
            raise ArgumentError(f"sampling degree must be an integer >= 1, got {degree!r}")
        self.patch_count = int(patch_count)
        self.degree = int(degree)
        self.local_nodes = _check_nodes(local_nodes, self.degree)
        self.local_nodes.setflags(write=False)
        self.allow_high_degree = allow_high_degree

    @property
    def global_nodes(self) -> NDArray[np.float64]:
        """
        (patch_count, D+1) array of global parameters t_{i,j}
        """
        patches = np.arange(self.patch_count, dtype=float).reshape(-1, 1)
        return (patches + self.local_nodes) / self.patch_count

    @property
    def distinct_nodes(self) -> NDArray[np.float64]:
        return np.unique(self.global_nodes)

    @property
    def operator(self) -> CollocationOperator:
        return collocation_matrix(self.local_nodes, self.degree, self.allow_high_degree)

    def matches(self, curve: PiecewiseCurve) -> bool:
        return curve.patch_count == self.patch_count and curve.degree == self.degree

    def __eq__(self, other) -> bool:
        if not isinstance(other, SamplingGrid):
            return NotImplemented
        return (self.patch_count == other.patch_count and self.degree == other.degree
                and np.array_equal(self.local_nodes, other.local_nodes))

    __hash__ = None

    def __repr__(self):
        return f"<SamplingGrid patches={self.patch_count} degree={self.degree} nodes={self.local_nodes.tolist()}>"


def regular_grid(N_plus_1: int, D: int, allow_high_degree: bool = False) -> SamplingGrid:
    """
    Regular sampling: local nodes j/D on every patch
    """
    if isinstance(D, bool) or not isinstance(D, (int, np.integer)) or D < 1:
        raise ArgumentError(f"sampling degree must be an integer >= 1, got {D!r}")
    return SamplingGrid(N_plus_1, D, np.arange(D + 1) / D, allow_high_degree)


def chebyshev_grid(N_plus_1: int, D: int, allow_high_degree: bool = False) -> SamplingGrid:
    """
    Chebyshev-Lobatto local nodes (1 - cos(pi j / D)) / 2, better conditioned than j/D for larger D
    """
    if isinstance(D, bool) or not isinstance(D, (int, np.integer)) or D < 1:
        raise ArgumentError(f"sampling degree must be an integer >= 1, got {D!r}")
    nodes = 0.5 * (1.0 - np.cos(np.pi * np.arange(D + 1) / D))
    nodes[0], nodes[-1] = 0.0, 1.0
    return SamplingGrid(N_plus_1, D, nodes, allow_high_degree)


NODE_KINDS: Dict[str, Callable[..., SamplingGrid]] = {
    "regular": regular_grid,
    "chebyshev": chebyshev_grid,
}


def make_grid(kind: str, N_plus_1: int, D: int, allow_high_degree: bool = False) -> SamplingGrid:
    if kind not in NODE_KINDS:
        raise ArgumentError(f"unknown node placement {kind!r}, expected one of {sorted(NODE_KINDS)}")
    return NODE_KINDS[kind](N_plus_1, D, allow_high_degree)


class SampleMatrix:
    """
    Sample points M_{i,j} of a piecewise curve grouped by patch, a (N+1, D+1, 2) array
    """

    points: NDArray[np.float64]

    def __init__(self, points: ArrayLike):
        array = np.array(points, dtype=float)
        if array.ndim != 3 or array.shape[2] != 2 or array.shape[0] == 0 or array.shape[1] < 2:
            raise ArgumentError(f"sample matrix must have shape (N+1, D+1, 2), got {array.shape}")
        if not np.all(np.isfinite(array)):
            raise DataError("sample points must be finite")
        array.setflags(write=False)
        self.points = array

    @classmethod
    def from_rows(cls, rows: ArrayLike, patch_count: int, degree: int) -> "SampleMatrix":
        rows = np.asarray(rows, dtype=float)
        expected = patch_count * (degree + 1)
        if rows.shape != (expected, 2):
            raise ArgumentError(f"{patch_count} patches of degree {degree} need {expected} sample rows, "
                                f"got {rows.shape[0] if rows.ndim else 0}")
        return cls(rows.reshape(patch_count, degree + 1, 2))

    @property
    def patch_count(self) -> int:
        return self.points.shape[0]

    @property
    def degree(self) -> int:
        return self.points.shape[1] - 1

    def rows(self) -> NDArray[np.float64]:
        return self.points.reshape(-1, 2)

    def __repr__(self):
        return f"<SampleMatrix patches={self.patch_count} degree={self.degree}>"


def _check_shape(patch_count: int, degree: int, grid: SamplingGrid, what: str) -> None:
    if patch_count != grid.patch_count or degree != grid.degree:
        raise ArgumentError(f"{what} has {patch_count} patches of degree {degree} but the grid has "
                            f"{grid.patch_count} patches of degree {grid.degree}")


def fit_patch(op: CollocationOperator, samples: ArrayLike) -> ControlPolygon:
    """
    The unique patch passing through samples[j] at node j
    """
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (op.degree + 1, 2):
        raise ArgumentError(f"degree {op.degree} needs {op.degree + 1} samples, got shape {samples.shape}")
    points = op.solve(samples)
    # endpoint rows of B are unit vectors
    points[0], points[-1] = samples[0], samples[-1]
    return ControlPolygon(points)


def fit_control_net(values: ArrayLike, grid: SamplingGrid, closed: bool = False,
                    label: str = "samples") -> NDArray[np.float64]:
    """
    Apply the block-diagonal inverse collocation operator to a (N+1, D+1, 2) array.
    Shared entries are reconciled first, so the result satisfies the join
    (and closure) equalities exactly.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 3 or values.shape[2] != 2:
        raise ArgumentError(f"expected a (N+1, D+1, 2) array, got shape {values.shape}")
    _check_shape(values.shape[0], values.shape[1] - 1, grid, label)
    values = reconcile_joins(values, closed, JOIN_TOLERANCE, label=label)
    count, width = values.shape[0], values.shape[1]
    rhs = values.transpose(1, 0, 2).reshape(width, 2 * count)
    net = grid.operator.solve(rhs).reshape(width, count, 2).transpose(1, 0, 2).copy()
    net[:, 0] = values[:, 0]
    net[:, -1] = values[:, -1]
    return net


def _detect_closed(points: NDArray[np.float64]) -> bool:
    return bool(np.linalg.norm(points[0, 0] - points[-1, -1]) <= JOIN_TOLERANCE)


def sample_curve(curve: PiecewiseCurve, grid: SamplingGrid) -> SampleMatrix:
    """
    Evaluate every patch at the grid's local nodes
    """
    _check_shape(curve.patch_count, curve.degree, grid, "curve")
    points = np.stack([evaluate_patch_many(patch, grid.local_nodes) for patch in curve.patches])
    return SampleMatrix(points)


def fit_curve(samples: SampleMatrix, grid: SamplingGrid, closed: Optional[bool] = None) -> PiecewiseCurve:
    """
    The piecewise curve interpolating the sample matrix at the grid nodes.
    closed=None treats the curve as closed when its first and last samples coincide.
    """
    if closed is None:
        closed = _detect_closed(samples.points)
    net = fit_control_net(samples.points, grid, closed, label="samples")
    return PiecewiseCurve(net, closed)


def project_function(f: Callable[[float], ArrayLike], grid: SamplingGrid,
                     closed: Optional[bool] = None) -> PiecewiseCurve:
    """
    Sample a parametric function at every global grid node and fit the interpolating curve
    """
    cache: Dict[float, Point2] = {}
    values = np.empty((grid.patch_count, grid.degree + 1, 2))
    for (i, j), t in np.ndenumerate(grid.global_nodes):
        t = float(t)
        if t not in cache:
            value = np.asarray(f(t), dtype=float)
            if value.shape != (2,) or not np.all(np.isfinite(value)):
                raise DataError(f"function returned {value.tolist()} at t={t}; expected a finite 2D point")
            cache[t] = value
        values[i, j] = cache[t]
    return fit_curve(SampleMatrix(values), grid, closed)
