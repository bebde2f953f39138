import json

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from bezierflow.collocation import regular_grid, sample_curve
from bezierflow.deform import ControlIncrement
from bezierflow.documents import (curve_from_json, curve_to_json, increment_from_json, increment_to_json,
                                  polyline_from_csv, samples_from_csv, samples_to_csv, trajectory_from_json,
                                  trajectory_to_json)
from bezierflow.errors import DataError, DiscontinuityError
from bezierflow.flow import Iterate, Status, Trajectory


def test_curve_json(random_curve):
    curve = random_curve(3, 2, closed=True)
    text = curve_to_json(curve)
    payload = json.loads(text)
    assert payload["degree"] == 2
    assert payload["closed"] is True
    assert len(payload["patches"]) == 3
    assert text.endswith("\n")
    restored = curve_from_json(text)
    assert restored.closed
    assert_array_equal(restored.net, curve.net)


def test_increment_json():
    vectors = np.zeros((2, 3, 2))
    vectors[0, 1] = (0.1, 1e-17)
    vectors[0, 2] = vectors[1, 0] = (-2.5, 3.0)
    inc = ControlIncrement(vectors)
    restored = increment_from_json(increment_to_json(inc))
    assert not restored.closed
    assert_array_equal(restored.vectors, vectors)


def test_trajectory_json(random_curve):
    first, second = random_curve(2, 3), random_curve(2, 3)
    trajectory = Trajectory((Iterate(0, first, None, None), Iterate(4, second, 0.25, 1.5)), Status.DEGENERATE)
    text = trajectory_to_json(trajectory)
    payload = json.loads(text)
    assert payload["status"] == "degenerate"
    assert payload["iterates"][0]["stationarity"] is None
    assert payload["iterates"][1]["iter"] == 4
    restored = trajectory_from_json(text)
    assert restored.status == Status.DEGENERATE
    assert restored.iterations == 4
    assert restored.final.energy == 1.5
    assert_array_equal(restored.final.curve.net, second.net)


@pytest.mark.parametrize("text", [
    "{not json",
    '{"degree": 1, "closed": false}',
    '{"degree": 2, "closed": false, "patches": [[[0, 0], [1, 1]]]}',
])
def test_bad_curve_documents(text):
    with pytest.raises(DataError):
        curve_from_json(text)


def test_curve_document_with_a_broken_join():
    text = json.dumps({"degree": 1, "closed": False, "patches": [[[0, 0], [1, 0]], [[2, 0], [3, 0]]]})
    with pytest.raises(DiscontinuityError):
        curve_from_json(text)


def test_samples_csv(random_curve):
    grid = regular_grid(3, 2)
    samples = sample_curve(random_curve(3, 2), grid)
    text = samples_to_csv(samples, grid)
    lines = text.splitlines()
    assert lines[0] == "patch,node_index,global_t,x,y"
    assert len(lines) == 10
    assert lines[4].startswith("1,0,")
    assert_array_equal(samples_from_csv(text, 3, 2).points, samples.points)


def test_samples_csv_rows_in_any_order(random_curve):
    grid = regular_grid(2, 3)
    samples = sample_curve(random_curve(2, 3), grid)
    header, *rows = samples_to_csv(samples, grid).splitlines()
    shuffled = "\n".join([header] + rows[::-1]) + "\n"
    assert_array_equal(samples_from_csv(shuffled, 2, 3).points, samples.points)


def test_samples_csv_reads_back_the_same_doubles(random_curve):
    grid = regular_grid(3, 3)
    for _ in range(50):
        samples = sample_curve(random_curve(3, 3), grid)
        assert np.array_equal(samples_from_csv(samples_to_csv(samples, grid), 3, 3).points, samples.points)


@pytest.mark.parametrize("text", [
    "patch,node_index,global_t,x,y\n0,0,0.0,1.0,2.0\n0,1,1.0,3.0,4.0\n",
    "patch,node_index,global_t,x\n0,0,0.0,1.0\n0,1,0.5,3.0\n0,2,1.0,3.0\n",
    "patch,node_index,global_t,x,y\n0,0,0.0,1.0,2.0\n0,1,0.5,abc,4.0\n0,2,1.0,3.0,4.0\n",
    "patch,node_index,global_t,x,y\n0,0,0.0,1.0,2.0\n0,0,0.5,3.0,4.0\n0,2,1.0,3.0,4.0\n",
    "patch,node_index,global_t,x,y\n0,0,0.0,1.0,2.0\n0,1,0.5,inf,4.0\n0,2,1.0,3.0,4.0\n",
    "",
])
def test_bad_sample_tables(text):
    with pytest.raises(DataError):
        samples_from_csv(text, 1, 2)


def test_polyline_csv():
    assert_array_equal(polyline_from_csv("x,y\n0,0\n1,2\n"), [[0.0, 0.0], [1.0, 2.0]])
    with pytest.raises(DataError):
        polyline_from_csv("x,y\n0,0\n")
    with pytest.raises(DataError):
        polyline_from_csv("a,b\n0,0\n1,1\n")
