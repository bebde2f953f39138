"""
Integration of the lifted shape-gradient field on control-net space.

The state is the control net of a piecewise curve. The field at a curve is the
negative lifted shape gradient, so an Euler step is plain gradient descent and
RK4 is a higher-order integrator of the same field. Every stage moves shared
control points by identical amounts, so joins and closure hold exactly along
the whole trajectory.
"""
import logging
from enum import Enum
from typing import Callable, List, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from tqdm import tqdm

from bezierflow.bezier import PiecewiseCurve, dense_samples, evaluate_many
from bezierflow.collocation import SampleMatrix, SamplingGrid, fit_curve, sample_curve
from bezierflow.deform import (ControlIncrement, ShapeGradientEvaluator, apply_increment, as_shape_gradient,
                               close_increment, lift_shape_gradient, stationarity_norm)
from bezierflow.errors import ArgumentError, DegenerateCurveError, DegenerateError

ARC_LENGTH_SAMPLES = 256


class Method(str, Enum):
    EULER = "euler"
    RK4 = "rk4"


class Status(str, Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    DEGENERATE = "degenerate"


class FlowConfig(BaseModel):
    """
    Settings of one integration run
    """
    model_config = ConfigDict(frozen=True)

    method: Method = Method.RK4
    step: float = Field(0.1, gt=0.0, le=1.0)
    max_iters: int = Field(500, ge=0)
    tol: float = Field(1e-6, gt=0.0)
    resample_every: int = Field(0, ge=0)
    record_every: int = Field(1, ge=1)


class Iterate(NamedTuple):
    iteration: int
    curve: PiecewiseCurve
    stationarity: Optional[float]
    energy: Optional[float]


class Trajectory(NamedTuple):
    iterates: Tuple[Iterate, ...]
    status: Status

    @property
    def final(self) -> Iterate:
        return self.iterates[-1]

    @property
    def iterations(self) -> int:
        return self.final.iteration


def field_at(curve: PiecewiseCurve, grad: ShapeGradientEvaluator, grid: SamplingGrid) -> ControlIncrement:
    """
    The descent field: minus the lifted shape gradient, projected onto closed nets for closed curves
    """
    field = -lift_shape_gradient(curve, grad, grid)
    return close_increment(field) if curve.closed else field


def euler_step(curve: PiecewiseCurve, grad: ShapeGradientEvaluator, grid: SamplingGrid, h: float,
               field: Optional[ControlIncrement] = None) -> PiecewiseCurve:
    if field is None:
        field = field_at(curve, grad, grid)
    return apply_increment(curve, field, h)


def rk4_step(curve: PiecewiseCurve, grad: ShapeGradientEvaluator, grid: SamplingGrid, h: float,
             field: Optional[ControlIncrement] = None) -> PiecewiseCurve:
    """
    Classical four-stage Runge-Kutta step on the control net
    """
    k1 = field if field is not None else field_at(curve, grad, grid)
    k2 = field_at(apply_increment(curve, k1, h / 2.0), grad, grid)
    k3 = field_at(apply_increment(curve, k2, h / 2.0), grad, grid)
    k4 = field_at(apply_increment(curve, k3, h), grad, grid)
    return apply_increment(curve, k1 + 2.0 * k2 + 2.0 * k3 + k4, h / 6.0)


STEPPERS = {
    Method.EULER: euler_step,
    Method.RK4: rk4_step,
}


def sampled_energy(curve: PiecewiseCurve, grad: ShapeGradientEvaluator, grid: SamplingGrid) -> Optional[float]:
    """
    Sum of the pointwise energy over all grid nodes, None when the gradient has no known energy
    """
    points = sample_curve(curve, grid).points.reshape(-1, 2)
    values = as_shape_gradient(grad).energy(points, grid.global_nodes.reshape(-1))
    return None if values is None else float(np.sum(values))


def arc_length_resample(curve: PiecewiseCurve, grid: SamplingGrid) -> PiecewiseCurve:
    """
    Refit the curve through points spread along it by arc length: the grid node with global
    parameter t lands at the fraction t of the total length. Lengths are chord sums over a dense
    sampling and positions are interpolated along that polyline.
    """
    if not grid.matches(curve):
        raise ArgumentError(f"grid {grid} does not match {curve}")
    polyline = dense_samples(curve, ARC_LENGTH_SAMPLES)
    chords = np.linalg.norm(np.diff(polyline, axis=0), axis=1)
    total = float(chords.sum())
    if not total > 0.0:
        raise DegenerateCurveError("cannot resample a curve of zero length")
    cumulative = np.concatenate([[0.0], np.cumsum(chords)]) / total
    cumulative[-1] = 1.0
    targets = grid.global_nodes.reshape(-1)
    points = np.stack([np.interp(targets, cumulative, polyline[:, 0]),
                       np.interp(targets, cumulative, polyline[:, 1])], axis=1)
    samples = SampleMatrix(points.reshape(grid.patch_count, grid.degree + 1, 2))
    return fit_curve(samples, grid, closed=curve.closed)


def integrate(curve: PiecewiseCurve, grad: ShapeGradientEvaluator, grid: SamplingGrid, cfg: FlowConfig,
              show_progress: bool = False,
              callback: Optional[Callable[[Iterate], None]] = None) -> Trajectory:
    """
    Step the curve along the descent field until the field vanishes (stationarity below tol),
    the iteration budget runs out, or the curve degenerates
    """
    if not grid.matches(curve):
        raise ArgumentError(f"grid {grid} does not match {curve}")
    grad = as_shape_gradient(grad)
    stepper = STEPPERS[Method(cfg.method)]
    iterates: List[Iterate] = []

    def record(iteration: int, current: PiecewiseCurve, norm: Optional[float]) -> None:
        energy = sampled_energy(current, grad, grid) if norm is not None else None
        iterate = Iterate(iteration, current, norm, energy)
        iterates.append(iterate)
        logging.debug(f"Flow iterate {iteration}: stationarity {norm}, energy {energy}")
        if callback:
            callback(iterate)

    iteration = 0
    status = Status.MAX_ITERS
    with tqdm(total=cfg.max_iters, disable=not show_progress, desc=grad.name) as progress:
        try:
            field = field_at(curve, grad, grid)
        except DegenerateError as error:
            logging.warning(f"Flow could not start: {error}")
            record(0, curve, None)
            return Trajectory(tuple(iterates), Status.DEGENERATE)
        norm = stationarity_norm(field)
        record(0, curve, norm)

        while True:
            if norm < cfg.tol:
                status = Status.CONVERGED
                break
            if iteration >= cfg.max_iters:
                status = Status.MAX_ITERS
                break
            try:
                candidate = stepper(curve, grad, grid, cfg.step, field=field)
                if cfg.resample_every and (iteration + 1) % cfg.resample_every == 0:
                    candidate = arc_length_resample(candidate, grid)
                candidate_field = field_at(candidate, grad, grid)
            except DegenerateError as error:
                logging.warning(f"Flow stopped at iteration {iteration}: {error}")
                status = Status.DEGENERATE
                break
            curve, field, norm = candidate, candidate_field, stationarity_norm(candidate_field)
            iteration += 1
            progress.update(1)
            if iteration % cfg.record_every == 0:
                record(iteration, curve, norm)

    if iterates[-1].iteration != iteration:
        record(iteration, curve, norm)
    logging.info(f"Flow finished with status {status.value} after {iteration} iteration(s), "
                 f"stationarity {iterates[-1].stationarity}")
    return Trajectory(tuple(iterates), status)


def hausdorff_distance(a, b) -> float:
    """
    Symmetric Hausdorff distance between two point sets
    """
    a, b = np.asarray(a, dtype=float).reshape(-1, 2), np.asarray(b, dtype=float).reshape(-1, 2)
    distances = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return float(max(distances.min(axis=1).max(), distances.min(axis=0).max()))


def curve_hausdorff(first: PiecewiseCurve, second: PiecewiseCurve, samples: int = 512) -> float:
    ts = np.linspace(0.0, 1.0, samples)
    return hausdorff_distance(evaluate_many(first, ts), evaluate_many(second, ts))
