"""
Deformations of piecewise curves and their lift to control-net space.

A deformation sampled at the grid nodes is turned into a displacement of the
control net by the same block-diagonal inverse collocation operator that fits
curves, so moving the control net by the lifted increment moves the curve by
the interpolated deformation. Lifting a sampled shape gradient this way gives
the vector field that the flow module integrates.
"""
from abc import ABC, abstractmethod
from typing import Callable, Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from bezierflow.bezier import PiecewiseCurve, Point2, patch_derivative_many
from bezierflow.collocation import SamplingGrid, fit_control_net, sample_curve
from bezierflow.errors import ArgumentError, DataError, DegenerateTangentError, DiscontinuityError

CUSP_TOLERANCE = 1e-12


def _as_field(values: ArrayLike, what: str) -> NDArray[np.float64]:
    array = np.array(values, dtype=float)
    if array.ndim != 3 or array.shape[2] != 2 or array.shape[0] == 0 or array.shape[1] == 0:
        raise ArgumentError(f"{what} must have shape (N+1, D+1, 2), got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise DataError(f"{what} must be finite")
    return array


class DeformationSamples:
    """
    One tangent vector per grid node, grouped by patch
    """

    vectors: NDArray[np.float64]

    def __init__(self, vectors: ArrayLike):
        array = _as_field(vectors, "deformation samples")
        array.setflags(write=False)
        self.vectors = array

    @property
    def patch_count(self) -> int:
        return self.vectors.shape[0]

    @property
    def degree(self) -> int:
        return self.vectors.shape[1] - 1


class ControlIncrement:
    """
    A displacement of every control point of a piecewise curve.
    Shared control points always receive the same displacement.
    """

    vectors: NDArray[np.float64]
    closed: bool

    def __init__(self, vectors: ArrayLike, closed: bool = False):
        array = _as_field(vectors, "control increment")
        for i in range(len(array) - 1):
            if not np.array_equal(array[i, -1], array[i + 1, 0]):
                raise DiscontinuityError(f"increment differs across join {i}/{i + 1}")
        if closed and not np.array_equal(array[0, 0], array[-1, -1]):
            raise DiscontinuityError("increment differs at the closure point")
        array.setflags(write=False)
        self.vectors = array
        self.closed = bool(closed)

    @classmethod
    def zeros(cls, patch_count: int, degree: int, closed: bool = False) -> "ControlIncrement":
        return cls(np.zeros((patch_count, degree + 1, 2)), closed)

    @property
    def patch_count(self) -> int:
        return self.vectors.shape[0]

    @property
    def degree(self) -> int:
        return self.vectors.shape[1] - 1

    def _combine(self, other: "ControlIncrement") -> bool:
        if not isinstance(other, ControlIncrement):
            raise ArgumentError(f"cannot combine an increment with {type(other).__name__}")
        if other.vectors.shape != self.vectors.shape:
            raise ArgumentError(f"increment shapes differ: {self.vectors.shape} and {other.vectors.shape}")
        return self.closed and other.closed

    def __add__(self, other: "ControlIncrement") -> "ControlIncrement":
        closed = self._combine(other)
        return ControlIncrement(self.vectors + other.vectors, closed)

    def __sub__(self, other: "ControlIncrement") -> "ControlIncrement":
        closed = self._combine(other)
        return ControlIncrement(self.vectors - other.vectors, closed)

    def __mul__(self, factor: float) -> "ControlIncrement":
        return ControlIncrement(float(factor) * self.vectors, self.closed)

    __rmul__ = __mul__

    def __neg__(self) -> "ControlIncrement":
        return ControlIncrement(-self.vectors, self.closed)

    def __repr__(self):
        return f"<ControlIncrement patches={self.patch_count} degree={self.degree} norm={stationarity_norm(self):.3e}>"


class ShapeGradient(ABC):
    """
    A shape gradient: assigns a vector to a boundary point given the outward unit normal there
    and the point's global curve parameter. Implementations must be deterministic.
    """

    name: str = "shape gradient"

    @abstractmethod
    def evaluate(self, points: NDArray[np.float64], normals: NDArray[np.float64],
                 ts: NDArray[np.float64]) -> NDArray[np.float64]:
        """
        Gradient vectors at k points; points and normals are (k, 2), ts is (k,)
        """

    def energy(self, points: NDArray[np.float64], ts: NDArray[np.float64]) -> Optional[NDArray[np.float64]]:
        """
        Pointwise energy whose gradient this is, when one is known
        """
        return None

    def __call__(self, point: ArrayLike, normal: ArrayLike, t: float = 0.0) -> Point2:
        points = np.asarray(point, dtype=float).reshape(1, 2)
        normals = np.asarray(normal, dtype=float).reshape(1, 2)
        return self.evaluate(points, normals, np.array([float(t)]))[0]


class FunctionGradient(ShapeGradient):
    """
    Adapt a plain callable (point, normal) -> vector to the ShapeGradient contract
    """

    name = "function gradient"

    def __init__(self, function: Callable[[Point2, Point2], ArrayLike]):
        self.function = function

    def evaluate(self, points, normals, ts):
        return np.array([np.asarray(self.function(p, n), dtype=float) for p, n in zip(points, normals)]).reshape(-1, 2)


ShapeGradientEvaluator = Union[ShapeGradient, Callable[[Point2, Point2], ArrayLike]]


def as_shape_gradient(grad: ShapeGradientEvaluator) -> ShapeGradient:
    return grad if isinstance(grad, ShapeGradient) else FunctionGradient(grad)


def lift_deformation(samples: Union[DeformationSamples, ArrayLike], grid: SamplingGrid,
                     closed: bool = False) -> ControlIncrement:
    """
    The control-net increment whose curve interpolates the sampled deformation at the grid nodes
    """
    vectors = samples.vectors if isinstance(samples, DeformationSamples) else _as_field(samples, "deformation samples")
    return ControlIncrement(fit_control_net(vectors, grid, closed, label="deformation samples"), closed)


def apply_increment(curve: PiecewiseCurve, inc: ControlIncrement, h: float) -> PiecewiseCurve:
    """
    Translate every control point by h times its displacement
    """
    if inc.vectors.shape != curve.net.shape:
        raise ArgumentError(f"increment shape {inc.vectors.shape} does not match curve shape {curve.net.shape}")
    h = float(h)
    if not np.isfinite(h):
        raise ArgumentError(f"step must be finite, got {h}")
    return PiecewiseCurve(curve.net + h * inc.vectors, curve.closed)


def signed_area(points: ArrayLike) -> float:
    """
    Shoelace area of the polygon through the points (implicitly closed), positive when counter-clockwise
    """
    points = np.asarray(points, dtype=float)
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _node_loop(points: NDArray[np.float64]) -> NDArray[np.float64]:
    # every geometric node once, in curve order
    return np.concatenate([points[:, :-1].reshape(-1, 2), points[-1:, -1]])


def outward_normals(curve: PiecewiseCurve, grid: SamplingGrid):
    """
    Sample points and outward unit normals at every grid node, both (N+1, D+1, 2).
    Outward is the side away from the region enclosed by the sampled loop.
    """
    points = sample_curve(curve, grid).points
    tangents = np.stack([patch_derivative_many(patch, grid.local_nodes) for patch in curve.patches])
    speeds = np.linalg.norm(tangents, axis=2)
    if np.any(speeds < CUSP_TOLERANCE):
        i, j = np.argwhere(speeds < CUSP_TOLERANCE)[0]
        raise DegenerateTangentError(int(i), int(j), float(speeds[i, j]))
    orientation = 1.0 if signed_area(_node_loop(points)) >= 0.0 else -1.0
    normals = orientation * np.stack([tangents[..., 1], -tangents[..., 0]], axis=-1) / speeds[..., None]
    return points, normals


def average_shared(values: NDArray[np.float64], closed: bool) -> NDArray[np.float64]:
    """
    Replace each pair of entries that refer to the same geometric node by their mean
    """
    values = np.array(values, dtype=float)
    pairs = [((i, -1), (i + 1, 0)) for i in range(len(values) - 1)]
    if closed:
        pairs.append(((0, 0), (-1, -1)))
    for a, b in pairs:
        mean = 0.5 * (values[a] + values[b])
        values[a] = mean
        values[b] = mean
    return values


def sample_shape_gradient(curve: PiecewiseCurve, grad: ShapeGradientEvaluator,
                          grid: SamplingGrid) -> DeformationSamples:
    """
    The shape gradient evaluated at every grid node, symmetrized at shared nodes
    """
    grad = as_shape_gradient(grad)
    points, normals = outward_normals(curve, grid)
    ts = grid.global_nodes
    values = grad.evaluate(points.reshape(-1, 2), normals.reshape(-1, 2), ts.reshape(-1))
    values = np.asarray(values, dtype=float)
    if values.shape != (points.size // 2, 2) or not np.all(np.isfinite(values)):
        raise DataError(f"{grad.name} returned non-finite or misshapen values")
    return DeformationSamples(average_shared(values.reshape(points.shape), curve.closed))


def lift_shape_gradient(curve: PiecewiseCurve, grad: ShapeGradientEvaluator,
                        grid: SamplingGrid) -> ControlIncrement:
    """
    The lifted shape gradient at this curve: the value of the vector field on control-net space
    """
    return lift_deformation(sample_shape_gradient(curve, grad, grid), grid, curve.closed)


def stationarity_norm(inc: ControlIncrement) -> float:
    """
    Largest Euclidean length among the control-point displacements
    """
    if inc.vectors.size == 0:
        return 0.0
    return float(np.max(np.linalg.norm(inc.vectors, axis=2)))


def close_increment(inc: ControlIncrement) -> ControlIncrement:
    """
    Project an increment onto closed control nets by averaging the first and last displacements
    """
    vectors = np.array(inc.vectors)
    mean = 0.5 * (vectors[0, 0] + vectors[-1, -1])
    vectors[0, 0] = mean
    vectors[-1, -1] = mean
    return ControlIncrement(vectors, closed=True)
