"""
Bezier patches and piecewise Bezier curves of the plane.

A patch of degree D is described by its control polygon P_0..P_D.
A piecewise curve chains N+1 patches of one common degree, the last control
point of each patch being the first control point of the next one, and is
parametrized over [0, 1] with patch i covering [i/(N+1), (i+1)/(N+1)].
"""
import math
from typing import List, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from bezierflow.errors import ArgumentError, DiscontinuityError

Point2 = NDArray[np.float64]

MAX_DEGREE = 60
JOIN_TOLERANCE = 1e-9

# exact integer binomials, row D holds C(D, 0..D)
_BINOMIALS: List[List[int]] = [[math.comb(D, i) for i in range(D + 1)] for D in range(MAX_DEGREE + 1)]


def point2(x: float, y: float) -> Point2:
    """
    Build a finite point (or vector) of the plane
    """
    point = np.array([x, y], dtype=float)
    if not np.all(np.isfinite(point)):
        raise ArgumentError(f"point coordinates must be finite, got ({x}, {y})")
    return point


def _check_degree(D: int) -> None:
    if isinstance(D, bool) or not isinstance(D, (int, np.integer)):
        raise ArgumentError(f"degree must be an integer, got {D!r}")
    if D < 0 or D > MAX_DEGREE:
        raise ArgumentError(f"degree must be between 0 and {MAX_DEGREE}, got {D}")


def _check_parameter(t: float) -> float:
    t = float(t)
    if not math.isfinite(t):
        raise ArgumentError(f"parameter must be finite, got {t}")
    return t


def binomial(D: int, i: int) -> int:
    _check_degree(D)
    if not 0 <= i <= D:
        raise ArgumentError(f"index {i} out of range for degree {D}")
    return _BINOMIALS[D][i]


def bernstein_basis(i: int, D: int, t: float) -> float:
    """
    The Bernstein polynomial b_{i,D}(t) = C(D,i) (1-t)^(D-i) t^i
    """
    coefficient = binomial(D, i)
    t = _check_parameter(t)
    return coefficient * (1.0 - t) ** (D - i) * t ** i


def bernstein_matrix(D: int, ts: ArrayLike) -> NDArray[np.float64]:
    """
    Rows of Bernstein values: entry (r, i) is b_{i,D}(ts[r])
    """
    _check_degree(D)
    ts = np.asarray(ts, dtype=float).reshape(-1, 1)
    if not np.all(np.isfinite(ts)):
        raise ArgumentError("parameters must be finite")
    i = np.arange(D + 1)
    coefficients = np.array(_BINOMIALS[D], dtype=float)
    return coefficients * (1.0 - ts) ** (D - i) * ts ** i


def bernstein_row(D: int, t: float) -> NDArray[np.float64]:
    return bernstein_matrix(D, [_check_parameter(t)])[0]


class ControlPolygon:
    """
    The D+1 control points of a single Bezier patch, stored read-only as a (D+1, 2) array
    """

    points: NDArray[np.float64]

    def __init__(self, points: ArrayLike):
        array = np.array(points, dtype=float)
        if array.ndim != 2 or array.shape[1] != 2:
            raise ArgumentError(f"control polygon must be a sequence of 2D points, got shape {array.shape}")
        if array.shape[0] == 0:
            raise ArgumentError("control polygon must contain at least one point")
        _check_degree(array.shape[0] - 1)
        if not np.all(np.isfinite(array)):
            raise ArgumentError("control points must be finite")
        array.setflags(write=False)
        self.points = array

    @property
    def degree(self) -> int:
        return len(self.points) - 1

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ControlPolygon):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    __hash__ = None

    def __repr__(self):
        return f"<ControlPolygon degree={self.degree} {self.points.tolist()}>"

    def transformed(self, matrix: ArrayLike, offset: ArrayLike = (0.0, 0.0)) -> "ControlPolygon":
        """
        Apply the affine map x -> matrix @ x + offset to every control point
        """
        matrix = np.asarray(matrix, dtype=float)
        return ControlPolygon(self.points @ matrix.T + np.asarray(offset, dtype=float))


PolygonLike = Union[ControlPolygon, ArrayLike]


def as_polygon(poly: PolygonLike) -> ControlPolygon:
    return poly if isinstance(poly, ControlPolygon) else ControlPolygon(poly)


def de_casteljau(poly: PolygonLike, t: float) -> Point2:
    """
    Evaluate a patch by repeated convex combinations of its control points
    """
    poly = as_polygon(poly)
    t = _check_parameter(t)
    b = poly.points.copy()
    D = poly.degree
    for r in range(1, D + 1):
        b[:D + 1 - r] = (1.0 - t) * b[:D + 1 - r] + t * b[1:D + 2 - r]
    return b[0]


def evaluate_patch_many(poly: PolygonLike, ts: ArrayLike) -> NDArray[np.float64]:
    """
    de Casteljau evaluation at many parameters at once; returns a (len(ts), 2) array
    """
    poly = as_polygon(poly)
    ts = np.asarray(ts, dtype=float).reshape(-1, 1, 1)
    if not np.all(np.isfinite(ts)):
        raise ArgumentError("parameters must be finite")
    D = poly.degree
    b = np.broadcast_to(poly.points, (len(ts), D + 1, 2)).copy()
    for r in range(1, D + 1):
        b[:, :D + 1 - r] = (1.0 - ts) * b[:, :D + 1 - r] + ts * b[:, 1:D + 2 - r]
    return b[:, 0]


def eval_bernstein_form(poly: PolygonLike, t: float) -> Point2:
    """
    Evaluate a patch as the sum of its control points weighted by the Bernstein basis
    """
    poly = as_polygon(poly)
    return bernstein_row(poly.degree, t) @ poly.points


def _hodograph(poly: ControlPolygon) -> NDArray[np.float64]:
    return poly.degree * np.diff(poly.points, axis=0)


def eval_patch_derivative(poly: PolygonLike, t: float) -> Point2:
    """
    Derivative of a patch with respect to its local parameter
    """
    poly = as_polygon(poly)
    t = _check_parameter(t)
    if poly.degree == 0:
        return np.zeros(2)
    return bernstein_row(poly.degree - 1, t) @ _hodograph(poly)


def patch_derivative_many(poly: PolygonLike, ts: ArrayLike) -> NDArray[np.float64]:
    poly = as_polygon(poly)
    ts = np.asarray(ts, dtype=float).reshape(-1)
    if poly.degree == 0:
        return np.zeros((len(ts), 2))
    return bernstein_matrix(poly.degree - 1, ts) @ _hodograph(poly)


def monomial_to_bernstein(coeffs: ArrayLike) -> ControlPolygon:
    """
    Control polygon of the plane polynomial sum_k coeffs[k] t^k, with D = len(coeffs) - 1.
    Uses t^k = sum_{j>=k} C(j,k)/C(D,k) b_{j,D}(t).
    """
    a = np.array(coeffs, dtype=float)
    if a.ndim != 2 or a.shape[1] != 2 or a.shape[0] == 0:
        raise ArgumentError(f"monomial coefficients must be a non-empty sequence of 2D vectors, got shape {a.shape}")
    D = a.shape[0] - 1
    _check_degree(D)
    points = np.zeros_like(a)
    for j in range(D + 1):
        for k in range(j + 1):
            points[j] += (_BINOMIALS[j][k] / _BINOMIALS[D][k]) * a[k]
    return ControlPolygon(points)


def bernstein_to_monomial(poly: PolygonLike) -> NDArray[np.float64]:
    """
    Monomial coefficients a_k of a patch, a_k = C(D,k) sum_{i<=k} (-1)^(k-i) C(k,i) P_i
    """
    poly = as_polygon(poly)
    D = poly.degree
    coeffs = np.zeros((D + 1, 2))
    for k in range(D + 1):
        for i in range(k + 1):
            coeffs[k] += (-1) ** (k - i) * _BINOMIALS[k][i] * poly.points[i]
        coeffs[k] *= _BINOMIALS[D][k]
    return coeffs


def eval_monomial(coeffs: ArrayLike, t: float) -> Point2:
    result = np.zeros(2)
    for coefficient in np.asarray(coeffs, dtype=float)[::-1]:
        result = result * t + coefficient
    return result


def reconcile_joins(values: ArrayLike, closed: bool, tolerance: float = JOIN_TOLERANCE,
                    label: str = "values") -> NDArray[np.float64]:
    """
    Return a copy of a (N+1, D+1, 2) array in which every pair of entries that must coincide
    (last of patch i / first of patch i+1, and first / last overall when closed) is replaced
    by its midpoint. Pairs further apart than the tolerance raise DiscontinuityError.
    """
    values = np.array(values, dtype=float)
    for i in range(len(values) - 1):
        _merge(values, (i, -1), (i + 1, 0), tolerance, f"{label} at join {i}/{i + 1}")
    if closed:
        _merge(values, (0, 0), (-1, -1), tolerance, f"{label} at the closure point")
    return values


def _merge(values: NDArray[np.float64], a, b, tolerance: float, where: str) -> None:
    gap = float(np.linalg.norm(values[a] - values[b]))
    if not gap <= tolerance:
        raise DiscontinuityError(f"{where} differ by {gap:.3e} (tolerance {tolerance:.0e})")
    if gap > 0.0:
        midpoint = 0.5 * (values[a] + values[b])
        values[a] = midpoint
        values[b] = midpoint


class PiecewiseCurve:
    """
    N+1 Bezier patches of common degree D with shared joins, optionally closed.
    The control net is stored read-only as a (N+1, D+1, 2) array and the join
    (and closure) equalities hold exactly.
    """

    net: NDArray[np.float64]
    closed: bool

    def __init__(self, patches: Union[Sequence[PolygonLike], ArrayLike], closed: bool = False):
        if isinstance(patches, np.ndarray):
            raw = patches
        else:
            raw = [p.points if isinstance(p, ControlPolygon) else p for p in patches]
        try:
            net = np.array(raw, dtype=float)
        except ValueError as error:
            raise ArgumentError("all patches of a piecewise curve must have the same degree") from error
        if net.ndim != 3 or net.shape[2] != 2 or net.shape[0] == 0 or net.shape[1] == 0:
            raise ArgumentError(f"control net must have shape (N+1, D+1, 2), got {net.shape}")
        _check_degree(net.shape[1] - 1)
        if not np.all(np.isfinite(net)):
            raise ArgumentError("control points must be finite")
        for i in range(len(net) - 1):
            if not np.array_equal(net[i, -1], net[i + 1, 0]):
                raise DiscontinuityError(f"patch {i} ends at {net[i, -1].tolist()} but patch {i + 1} "
                                         f"starts at {net[i + 1, 0].tolist()}")
        if closed and not np.array_equal(net[0, 0], net[-1, -1]):
            raise DiscontinuityError(f"closed curve starts at {net[0, 0].tolist()} "
                                     f"but ends at {net[-1, -1].tolist()}")
        net.setflags(write=False)
        self.net = net
        self.closed = bool(closed)

    @classmethod
    def from_control_net(cls, net: ArrayLike, closed: bool = False,
                         tolerance: float = JOIN_TOLERANCE) -> "PiecewiseCurve":
        """
        Build a curve from a control net whose joins only match up to the tolerance
        """
        return cls(reconcile_joins(net, closed, tolerance, label="control points"), closed)

    @property
    def patch_count(self) -> int:
        return self.net.shape[0]

    @property
    def degree(self) -> int:
        return self.net.shape[1] - 1

    @property
    def patches(self) -> List[ControlPolygon]:
        return [ControlPolygon(points) for points in self.net]

    def patch(self, i: int) -> ControlPolygon:
        return ControlPolygon(self.net[i])

    def __eq__(self, other) -> bool:
        if not isinstance(other, PiecewiseCurve):
            return NotImplemented
        return self.closed == other.closed and np.array_equal(self.net, other.net)

    __hash__ = None

    def __repr__(self):
        kind = "closed" if self.closed else "open"
        return f"<PiecewiseCurve {kind} patches={self.patch_count} degree={self.degree}>"


def _locate(curve: PiecewiseCurve, ts: NDArray[np.float64]):
    count = curve.patch_count
    index = np.minimum(np.floor(ts * count).astype(int), count - 1)
    local = np.clip(ts * count - index, 0.0, 1.0)
    return index, local


def eval_piecewise(curve: PiecewiseCurve, t: float) -> Point2:
    """
    Evaluate the global parametrization: patch i on [i/(N+1), (i+1)/(N+1)] at local s = (N+1)t - i
    """
    t = _check_parameter(t)
    if not 0.0 <= t <= 1.0:
        raise ArgumentError(f"parameter must lie in [0, 1], got {t}")
    index, local = _locate(curve, np.array([t]))
    return de_casteljau(curve.patch(int(index[0])), float(local[0]))


def evaluate_many(curve: PiecewiseCurve, ts: ArrayLike) -> NDArray[np.float64]:
    ts = np.asarray(ts, dtype=float).reshape(-1)
    if not np.all((ts >= 0.0) & (ts <= 1.0)):
        raise ArgumentError("parameters must lie in [0, 1]")
    index, local = _locate(curve, ts)
    result = np.empty((len(ts), 2))
    for i in np.unique(index):
        mask = index == i
        result[mask] = evaluate_patch_many(curve.patch(int(i)), local[mask])
    return result


def dense_samples(curve: PiecewiseCurve, per_patch: int = 64) -> NDArray[np.float64]:
    """
    per_patch+1 evenly spaced local samples on every patch, joins listed once;
    (N+1)*per_patch + 1 points in curve order
    """
    if per_patch < 1:
        raise ArgumentError(f"per_patch must be positive, got {per_patch}")
    local = np.linspace(0.0, 1.0, per_patch + 1)
    chunks = [evaluate_patch_many(patch, local[:-1]) for patch in curve.patches]
    chunks.append(curve.net[-1, -1][None, :])
    return np.concatenate(chunks)
