"""
Concrete shape gradients: analytic energies with known minimizers, and the
edge energy of a grayscale image combined with a balloon force.
"""
import logging
from typing import Callable, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field

from bezierflow.bezier import Point2, point2
from bezierflow.deform import ShapeGradient
from bezierflow.errors import ArgumentError, DataError, DegenerateGradientError
from bezierflow.images import ScalarField, edge_stopping_field, gaussian_gradient_magnitude

GRADIENT_STEP = 0.5


class ImageEnergyConfig(BaseModel):
    """
    Parameters of the image edge energy
    """
    model_config = ConfigDict(frozen=True)

    sigma: float = Field(2.0, ge=0.5, le=10.0)  # Gaussian pre-smoothing, pixels
    balloon: float = 0.0  # positive inflates, pixels per unit time
    edge_exponent: Literal[2] = 2
    edge_contrast: float = Field(0.1, gt=0.0, le=1.0)  # normalized magnitude where g = 1/2


class ImageShapeGradient(ShapeGradient):
    """
    M, n -> grad g(M) - balloon * g(M) * n, with g the edge-stopping field of the smoothed image.
    The flow descends along the negative of this, so edges attract and a positive balloon inflates.
    """

    name = "image edge energy"

    def __init__(self, cfg: ImageEnergyConfig, img: ScalarField):
        self.cfg = cfg
        self.image = img
        self.magnitude = gaussian_gradient_magnitude(img, cfg.sigma)
        self.stopping = edge_stopping_field(self.magnitude, cfg.edge_contrast)
        self._warned = False

    def _clamp(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        outside = int(np.count_nonzero(~self.stopping.contains(points)))
        if outside:
            message = f"{outside} contour point(s) outside the {self.image.width}x{self.image.height} image, clamped"
            if self._warned:
                logging.debug(message)
            else:
                logging.warning(message)
                self._warned = True
        return self.stopping.clamp(points)

    def gradient(self, points: ArrayLike) -> NDArray[np.float64]:
        """
        Central differences of the bilinear interpolant of g with step GRADIENT_STEP
        """
        points = self.stopping.clamp(points)
        result = np.empty_like(points)
        for axis in (0, 1):
            forward, backward = points.copy(), points.copy()
            forward[:, axis] += GRADIENT_STEP
            backward[:, axis] -= GRADIENT_STEP
            forward, backward = self.stopping.clamp(forward), self.stopping.clamp(backward)
            spacing = forward[:, axis] - backward[:, axis]
            difference = self.stopping.sample(forward) - self.stopping.sample(backward)
            result[:, axis] = np.divide(difference, spacing, out=np.zeros_like(spacing), where=spacing > 0.0)
        return result

    def evaluate(self, points, normals, ts):
        points = self._clamp(points)
        g = self.stopping.sample(points)
        return self.gradient(points) - self.cfg.balloon * g[:, None] * np.asarray(normals, dtype=float)


def image_shape_gradient(cfg: ImageEnergyConfig, img: ScalarField) -> ImageShapeGradient:
    return ImageShapeGradient(cfg, img)


class PointAttractionGradient(ShapeGradient):
    """
    Gradient of 1/2 sum |M_k - target(t_k)|^2: each node is pulled towards the target point
    of its own global parameter
    """

    name = "point attraction"

    def __init__(self, target: Callable[[float], ArrayLike]):
        self.target = target

    def targets(self, ts: ArrayLike) -> NDArray[np.float64]:
        values = np.array([np.asarray(self.target(float(t)), dtype=float) for t in np.ravel(ts)]).reshape(-1, 2)
        if not np.all(np.isfinite(values)):
            raise DataError("target map returned non-finite points")
        return values

    def evaluate(self, points, normals, ts):
        return np.asarray(points, dtype=float) - self.targets(ts)

    def energy(self, points, ts):
        return 0.5 * np.sum((np.asarray(points, dtype=float) - self.targets(ts)) ** 2, axis=1)


def point_attraction_gradient(targets: Callable[[float], ArrayLike]) -> PointAttractionGradient:
    return PointAttractionGradient(targets)


class CircleAttractionGradient(ShapeGradient):
    """
    Gradient of 1/2 (|M - c| - r)^2, the radial distance to a circle
    """

    name = "circle attraction"

    def __init__(self, center: ArrayLike, radius: float):
        self.center = np.asarray(center, dtype=float).reshape(2)
        self.radius = float(radius)
        if not np.all(np.isfinite(self.center)):
            raise ArgumentError("circle center must be finite")
        if not self.radius > 0.0 or not np.isfinite(self.radius):
            raise ArgumentError(f"circle radius must be positive, got {radius}")

    def _offsets(self, points):
        offsets = np.asarray(points, dtype=float) - self.center
        distances = np.linalg.norm(offsets, axis=1)
        if np.any(distances < 1e-12):
            raise DegenerateGradientError(f"circle attraction is undefined at the center {self.center.tolist()}")
        return offsets, distances

    def evaluate(self, points, normals, ts):
        offsets, distances = self._offsets(points)
        return ((distances - self.radius) / distances)[:, None] * offsets

    def energy(self, points, ts):
        _, distances = self._offsets(points)
        return 0.5 * (distances - self.radius) ** 2


def circle_attraction_gradient(center: ArrayLike, radius: float) -> CircleAttractionGradient:
    return CircleAttractionGradient(center, radius)


class CircleTarget:
    """
    The circle of the given center and radius parametrized by arc angle over [0, 1]
    """

    def __init__(self, center: ArrayLike, radius: float):
        self.center = np.asarray(center, dtype=float).reshape(2)
        self.radius = float(radius)

    def __call__(self, t: float) -> Point2:
        angle = 2.0 * np.pi * t
        return self.center + self.radius * np.array([np.cos(angle), np.sin(angle)])


class PolylineTarget:
    """
    Piecewise-linear interpolation of a polyline, parametrized by normalized chord length
    """

    def __init__(self, points: ArrayLike):
        self.points = np.asarray(points, dtype=float).reshape(-1, 2)
        if len(self.points) < 2:
            raise DataError("a polyline target needs at least two points")
        if not np.all(np.isfinite(self.points)):
            raise DataError("polyline points must be finite")
        lengths = np.linalg.norm(np.diff(self.points, axis=0), axis=1)
        total = float(lengths.sum())
        if total <= 0.0:
            self.parameters = np.linspace(0.0, 1.0, len(self.points))
        else:
            self.parameters = np.concatenate([[0.0], np.cumsum(lengths) / total])
            self.parameters[-1] = 1.0

    def __call__(self, t: float) -> Point2:
        return point2(np.interp(t, self.parameters, self.points[:, 0]),
                      np.interp(t, self.parameters, self.points[:, 1]))
