"""
SVG rendering of piecewise curves, flow trajectories and segmentation overlays
"""
import base64
import io
import xml.etree.ElementTree as ET
from typing import List, Optional, Sequence

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from svgpathtools import CubicBezier, Line, Path, QuadraticBezier

from bezierflow import __version__
from bezierflow.bezier import PiecewiseCurve, evaluate_patch_many
from bezierflow.errors import ArgumentError
from bezierflow.flow import Trajectory
from bezierflow.images import ScalarField

SVG_NAMESPACE = "http://www.w3.org/2000/svg"
XLINK_NAMESPACE = "http://www.w3.org/1999/xlink"
POLYLINE_SAMPLES = 64
MIN_OPACITY = 0.2

ET.register_namespace("xlink", XLINK_NAMESPACE)


def _complex(point) -> complex:
    return complex(float(point[0]), float(point[1]))


def _segments(curve: PiecewiseCurve) -> List:
    """
    svgpathtools segments for every patch: exact Line / QuadraticBezier / CubicBezier up to
    degree 3, a polyline of POLYLINE_SAMPLES chords above
    """
    segments = []
    local = np.linspace(0.0, 1.0, POLYLINE_SAMPLES + 1)
    for patch in curve.patches:
        p = [_complex(point) for point in patch.points]
        if patch.degree <= 1:
            segments.append(Line(p[0], p[-1]))
        elif patch.degree == 2:
            segments.append(QuadraticBezier(*p))
        elif patch.degree == 3:
            segments.append(CubicBezier(*p))
        else:
            points = [_complex(point) for point in evaluate_patch_many(patch, local)]
            points[0], points[-1] = p[0], p[-1]
            segments.extend(Line(a, b) for a, b in zip(points[:-1], points[1:]))
    return segments


def path_data(curve: PiecewiseCurve) -> str:
    """
    The d attribute of the curve, control points verbatim; closed curves end with Z
    """
    d = Path(*_segments(curve)).d()
    return d + " Z" if curve.closed else d


def _bounds(curves: Sequence[PiecewiseCurve]):
    # control nets contain their curves
    points = np.concatenate([curve.net.reshape(-1, 2) for curve in curves])
    low, high = points.min(axis=0), points.max(axis=0)
    extent = float(max(high[0] - low[0], high[1] - low[1], 1e-9))
    pad = 0.05 * extent
    return low - pad, high + pad, extent


def _document(width: str, height: str, view_box: str) -> ET.Element:
    return ET.Element("svg", {
        "xmlns": SVG_NAMESPACE,
        "version": "1.1",
        "width": width,
        "height": height,
        "viewBox": view_box,
    })


def _serialize(root: ET.Element, note: str) -> str:
    header = f'<?xml version="1.0" encoding="UTF-8"?>\n<!-- bezierflow {__version__}: {note} -->\n'
    return header + ET.tostring(root, encoding="unicode") + "\n"


def _path(parent: ET.Element, curve: PiecewiseCurve, css_class: str, color: str,
          width: float, opacity: float = 1.0) -> ET.Element:
    return ET.SubElement(parent, "path", {
        "class": css_class,
        "d": path_data(curve),
        "fill": "none",
        "stroke": color,
        "stroke-width": repr(width),
        "stroke-opacity": f"{opacity:.3f}",
    })


def _selected(trajectory: Trajectory, every: int):
    if every < 1:
        raise ArgumentError(f"every must be a positive integer, got {every}")
    chosen = list(trajectory.iterates[::every])
    if chosen[-1] is not trajectory.iterates[-1]:
        chosen.append(trajectory.iterates[-1])
    return chosen


def _opacity(k: int, count: int) -> float:
    if count == 1:
        return 1.0
    return MIN_OPACITY + (1.0 - MIN_OPACITY) * k / (count - 1)


def curves_to_svg(curve: Optional[PiecewiseCurve] = None, trajectory: Optional[Trajectory] = None,
                  every: int = 1) -> str:
    """
    Render a curve and/or the recorded iterates of a trajectory in curve coordinates
    (y pointing up, flipped by a group transform). Iterates fade in from the first to the last.
    """
    if curve is None and trajectory is None:
        raise ArgumentError("nothing to render: pass a curve or a trajectory")
    iterates = _selected(trajectory, every) if trajectory is not None else []
    curves = [it.curve for it in iterates] + ([curve] if curve is not None else [])
    low, high, extent = _bounds(curves)
    size = high - low
    root = _document("512", f"{512.0 * size[1] / size[0]:.1f}",
                     f"{low[0]!r} {-high[1]!r} {size[0]!r} {size[1]!r}")
    group = ET.SubElement(root, "g", {"transform": "scale(1,-1)"})
    stroke = 0.004 * extent
    for k, iterate in enumerate(iterates):
        element = _path(group, iterate.curve, "iterate", "#1f77b4", stroke, _opacity(k, len(iterates)))
        element.set("data-iteration", str(iterate.iteration))
    if curve is not None:
        _path(group, curve, "curve", "#d62728", 1.5 * stroke)
    return _serialize(root, "curve coordinates, y axis flipped to point up")


def _png_base64(img: ScalarField) -> str:
    buffer = io.BytesIO()
    plt.imsave(buffer, img.values, cmap="gray", vmin=0.0, vmax=1.0, format="png", metadata={"Software": None})
    return base64.b64encode(buffer.getvalue()).decode("ascii")


def overlay_to_svg(img: ScalarField, contour: PiecewiseCurve, initial: Optional[PiecewiseCurve] = None) -> str:
    """
    Segmentation overlay in pixel coordinates: the image as a raster layer, the initial and final
    contours as paths on top
    """
    root = _document(str(img.width), str(img.height), f"-0.5 -0.5 {img.width} {img.height}")
    ET.SubElement(root, "image", {
        "x": "-0.5",
        "y": "-0.5",
        "width": str(img.width),
        "height": str(img.height),
        f"{{{XLINK_NAMESPACE}}}href": "data:image/png;base64," + _png_base64(img),
    })
    if initial is not None:
        _path(root, initial, "initial", "#ff7f0e", 0.75, 0.8)
    _path(root, contour, "contour", "#d62728", 1.0)
    return _serialize(root, "pixel coordinates, origin at the top-left pixel, y axis pointing down")
