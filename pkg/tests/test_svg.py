import base64
import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from bezierflow import __version__
from bezierflow.bezier import PiecewiseCurve
from bezierflow.errors import ArgumentError
from bezierflow.flow import Iterate, Status, Trajectory
from bezierflow.images import ScalarField
from bezierflow.svg import curves_to_svg, overlay_to_svg, path_data

SVG = "{http://www.w3.org/2000/svg}"
XLINK = "{http://www.w3.org/1999/xlink}"
NUMBER = re.compile(r"-?\d+(?:\.\d+)?(?:e[-+]?\d+)?")


def commands(d):
    return re.findall(r"[MLCQZ]", d)


def numbers(d):
    return [float(value) for value in NUMBER.findall(d)]


def paths(svg, css_class):
    root = ET.fromstring(svg.encode())
    return [element for element in root.iter(f"{SVG}path") if element.get("class") == css_class]


def shifted(curve, dx):
    return PiecewiseCurve(curve.net + (dx, 0.0), curve.closed)


def test_line_path():
    line = PiecewiseCurve([[(0.0, 0.0), (1.0, 2.0)]])
    d = path_data(line)
    assert commands(d) == ["M", "L"]
    assert numbers(d) == [0.0, 0.0, 1.0, 2.0]


def test_cubic_path_keeps_control_points():
    cubic = PiecewiseCurve([[(0.0, 0.0), (1.0, 2.0), (3.0, 2.0), (4.0, 0.0)],
                            [(4.0, 0.0), (5.0, -1.5), (6.0, 0.25), (7.0, 0.0)]])
    d = path_data(cubic)
    assert commands(d) == ["M", "C", "C"]
    assert numbers(d) == [0.0, 0.0, 1.0, 2.0, 3.0, 2.0, 4.0, 0.0, 5.0, -1.5, 6.0, 0.25, 7.0, 0.0]


def test_quadratic_path():
    quadratic = PiecewiseCurve([[(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]])
    assert commands(path_data(quadratic)) == ["M", "Q"]


def test_high_degree_patches_become_polylines(random_curve):
    curve = random_curve(2, 5)
    d = path_data(curve)
    assert commands(d).count("L") == 128
    values = numbers(d)
    assert values[:2] == curve.net[0, 0].tolist()
    assert values[-2:] == curve.net[-1, -1].tolist()


def test_closed_curves_end_with_z(circle_curve):
    d = path_data(circle_curve())
    assert d.endswith(" Z")
    assert commands(d).count("C") == 8


def test_curve_document(circle_curve):
    svg = curves_to_svg(circle_curve())
    lines = svg.splitlines()
    assert lines[0] == '<?xml version="1.0" encoding="UTF-8"?>'
    assert lines[1].startswith(f"<!-- bezierflow {__version__}:")
    root = ET.fromstring(svg.encode())
    assert root.tag == f"{SVG}svg"
    assert root.find(f"{SVG}g").get("transform") == "scale(1,-1)"
    assert len(paths(svg, "curve")) == 1


def test_trajectory_iterates_fade_in(circle_curve):
    curve = circle_curve()
    iterates = tuple(Iterate(k, shifted(curve, 0.1 * k), 1.0 / (k + 1), None) for k in range(3))
    svg = curves_to_svg(trajectory=Trajectory(iterates, Status.MAX_ITERS))
    drawn = paths(svg, "iterate")
    assert [element.get("data-iteration") for element in drawn] == ["0", "1", "2"]
    assert [element.get("stroke-opacity") for element in drawn] == ["0.200", "0.600", "1.000"]
    assert not paths(svg, "curve")


def test_every_keeps_the_final_iterate(circle_curve):
    curve = circle_curve()
    iterates = tuple(Iterate(k, shifted(curve, 0.1 * k), 1.0, None) for k in range(4))
    svg = curves_to_svg(curve, Trajectory(iterates, Status.MAX_ITERS), every=2)
    assert [element.get("data-iteration") for element in paths(svg, "iterate")] == ["0", "2", "3"]
    assert len(paths(svg, "curve")) == 1
    with pytest.raises(ArgumentError):
        curves_to_svg(trajectory=Trajectory(iterates, Status.MAX_ITERS), every=0)


def test_nothing_to_render():
    with pytest.raises(ArgumentError):
        curves_to_svg()


def test_overlay(circle_curve):
    img = ScalarField(np.linspace(0.0, 1.0, 48).reshape(6, 8))
    contour = PiecewiseCurve(circle_curve(2.0).net + (4.0, 3.0), closed=True)
    svg = overlay_to_svg(img, contour, initial=contour)
    root = ET.fromstring(svg.encode())
    assert root.get("viewBox") == "-0.5 -0.5 8 6"
    image = root.find(f"{SVG}image")
    href = image.get(f"{XLINK}href")
    assert href.startswith("data:image/png;base64,")
    assert base64.b64decode(href.split(",", 1)[1]).startswith(b"\x89PNG")
    assert len(paths(svg, "initial")) == 1
    assert paths(svg, "contour")[0].get("d").endswith(" Z")
