"""
Wire formats: curve, increment and trajectory JSON documents (pydantic models)
and the sample / polyline CSV tables (pandas).
"""
import io
import json
from typing import List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from bezierflow.bezier import PiecewiseCurve
from bezierflow.collocation import SampleMatrix, SamplingGrid
from bezierflow.deform import ControlIncrement
from bezierflow.errors import ArgumentError, DataError
from bezierflow.flow import Iterate, Status, Trajectory

SAMPLE_COLUMNS = ["patch", "node_index", "global_t", "x", "y"]


def _dumps(payload: dict) -> str:
    # floats use repr, which reads back to the identical double
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


class CurveDocument(BaseModel):
    """
    JSON form of a piecewise curve
    """
    degree: int
    closed: bool
    patches: List[List[List[float]]]

    @classmethod
    def from_curve(cls, curve: PiecewiseCurve) -> "CurveDocument":
        return cls(degree=curve.degree, closed=curve.closed, patches=curve.net.tolist())

    def to_curve(self) -> PiecewiseCurve:
        net = np.array(self.patches, dtype=float)
        if net.ndim != 3 or net.shape[1] != self.degree + 1 or net.shape[2] != 2:
            raise DataError(f"curve document declares degree {self.degree} but its patches have shape {net.shape}")
        return PiecewiseCurve.from_control_net(net, self.closed)


class IncrementDocument(BaseModel):
    """
    JSON form of a control increment: same layout as a curve, displacement vectors instead of points
    """
    degree: int
    closed: bool
    patches: List[List[List[float]]]

    @classmethod
    def from_increment(cls, inc: ControlIncrement) -> "IncrementDocument":
        return cls(degree=inc.degree, closed=inc.closed, patches=inc.vectors.tolist())

    def to_increment(self) -> ControlIncrement:
        vectors = np.array(self.patches, dtype=float)
        if vectors.ndim != 3 or vectors.shape[1] != self.degree + 1 or vectors.shape[2] != 2:
            raise DataError(f"increment document declares degree {self.degree} but has shape {vectors.shape}")
        return ControlIncrement(vectors, self.closed)


class IterateDocument(BaseModel):
    iter: int
    stationarity: Optional[float]
    energy: Optional[float]
    curve: CurveDocument


class TrajectoryDocument(BaseModel):
    """
    JSON form of a flow trajectory
    """
    status: Status
    iterates: List[IterateDocument]

    @classmethod
    def from_trajectory(cls, trajectory: Trajectory) -> "TrajectoryDocument":
        return cls(status=trajectory.status, iterates=[
            IterateDocument(iter=it.iteration, stationarity=it.stationarity, energy=it.energy,
                            curve=CurveDocument.from_curve(it.curve))
            for it in trajectory.iterates
        ])

    def to_trajectory(self) -> Trajectory:
        return Trajectory(tuple(Iterate(it.iter, it.curve.to_curve(), it.stationarity, it.energy)
                                for it in self.iterates), Status(self.status))


def _parse(model, text: str, what: str):
    try:
        return model.model_validate_json(text)
    except ValidationError as error:
        raise DataError(f"invalid {what} JSON: {error.errors()[0]['msg']}") from error


def curve_to_json(curve: PiecewiseCurve) -> str:
    return _dumps(CurveDocument.from_curve(curve).model_dump())


def curve_from_json(text: str) -> PiecewiseCurve:
    return _parse(CurveDocument, text, "curve").to_curve()


def increment_to_json(inc: ControlIncrement) -> str:
    return _dumps(IncrementDocument.from_increment(inc).model_dump())


def increment_from_json(text: str) -> ControlIncrement:
    return _parse(IncrementDocument, text, "increment").to_increment()


def trajectory_to_json(trajectory: Trajectory) -> str:
    return _dumps(TrajectoryDocument.from_trajectory(trajectory).model_dump(mode="json"))


def trajectory_from_json(text: str) -> Trajectory:
    return _parse(TrajectoryDocument, text, "trajectory").to_trajectory()


def samples_to_csv(samples: SampleMatrix, grid: SamplingGrid) -> str:
    """
    One row per (patch, node): patch,node_index,global_t,x,y
    """
    patches, nodes = np.meshgrid(np.arange(samples.patch_count), np.arange(samples.degree + 1), indexing="ij")
    rows = samples.rows()
    frame = pd.DataFrame({
        "patch": patches.reshape(-1),
        "node_index": nodes.reshape(-1),
        "global_t": grid.global_nodes.reshape(-1),
        "x": rows[:, 0],
        "y": rows[:, 1],
    }, columns=SAMPLE_COLUMNS)
    return frame.to_csv(index=False, float_format="%.17g")


def _read_frame(text: str, what: str) -> pd.DataFrame:
    try:
        return pd.read_csv(io.StringIO(text), float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as error:
        raise DataError(f"unreadable {what} CSV: {error}") from error


def samples_from_csv(text: str, patch_count: int, degree: int) -> SampleMatrix:
    """
    Read a sample table written by samples_to_csv (rows may come in any order)
    """
    frame = _read_frame(text, "sample")
    missing = [column for column in SAMPLE_COLUMNS if column not in frame.columns]
    if missing:
        raise DataError(f"sample CSV is missing columns {missing}")
    expected = patch_count * (degree + 1)
    if len(frame) != expected:
        raise DataError(f"{patch_count} patches of degree {degree} need {expected} sample rows, got {len(frame)}")
    try:
        frame = frame.astype({"patch": int, "node_index": int, "x": float, "y": float})
    except (ValueError, TypeError) as error:
        raise DataError(f"sample CSV has non-numeric entries: {error}") from error
    frame = frame.sort_values(["patch", "node_index"], kind="stable")
    expected_index = [(i, j) for i in range(patch_count) for j in range(degree + 1)]
    if list(zip(frame["patch"], frame["node_index"])) != expected_index:
        raise DataError("sample CSV must contain each (patch, node_index) pair exactly once")
    rows = frame[["x", "y"]].to_numpy(dtype=float)
    if not np.all(np.isfinite(rows)):
        raise DataError("sample CSV contains non-finite coordinates")
    try:
        return SampleMatrix.from_rows(rows, patch_count, degree)
    except ArgumentError as error:
        raise DataError(str(error)) from error


def polyline_from_csv(text: str) -> np.ndarray:
    """
    Read a polyline given as x,y columns
    """
    frame = _read_frame(text, "polyline")
    if not {"x", "y"} <= set(frame.columns):
        raise DataError("polyline CSV needs x and y columns")
    try:
        points = frame[["x", "y"]].to_numpy(dtype=float)
    except (ValueError, TypeError) as error:
        raise DataError(f"polyline CSV has non-numeric entries: {error}") from error
    if len(points) < 2 or not np.all(np.isfinite(points)):
        raise DataError("polyline CSV needs at least two finite points")
    return points
