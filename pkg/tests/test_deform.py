import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from bezierflow.bezier import PiecewiseCurve, evaluate_many
from bezierflow.collocation import project_function, regular_grid, sample_curve
from bezierflow.deform import (ControlIncrement, DeformationSamples, FunctionGradient, ShapeGradient,
                               apply_increment, close_increment, lift_deformation, lift_shape_gradient,
                               outward_normals, sample_shape_gradient, signed_area, stationarity_norm)
from bezierflow.errors import ArgumentError, DataError, DegenerateTangentError, DiscontinuityError


def consistent_samples(rng, patch_count, degree, scale=1.0, closed=False):
    values = rng.uniform(-scale, scale, size=(patch_count, degree + 1, 2))
    for i in range(patch_count - 1):
        values[i + 1, 0] = values[i, -1]
    if closed:
        values[-1, -1] = values[0, 0]
    return values


def test_zero_samples_lift_to_zero():
    grid = regular_grid(5, 4)
    inc = lift_deformation(np.zeros((5, 5, 2)), grid)
    assert stationarity_norm(inc) < 1e-12


def test_lift_inverts_sampling(rng):
    grid = regular_grid(4, 3)
    for _ in range(20):
        values = consistent_samples(rng, 4, 3)
        inc = lift_deformation(DeformationSamples(values), grid)
        for i in range(4):
            assert_allclose(grid.operator.apply(inc.vectors[i]), values[i], atol=1e-12)


def test_small_lift_bounds_the_samples(rng):
    # Bernstein rows are convex weights, so no sample is longer than the longest control displacement
    grid = regular_grid(6, 5)
    for scale in (1.0, 1e-6, 1e-13):
        values = consistent_samples(rng, 6, 5, scale)
        inc = lift_deformation(values, grid)
        longest_sample = np.max(np.linalg.norm(values, axis=2))
        assert longest_sample <= stationarity_norm(inc) * (1 + 1e-9) + 1e-300
        if stationarity_norm(inc) < 1e-12:
            assert longest_sample < 1e-9


def test_lift_rejects_inconsistent_joins():
    values = np.zeros((2, 3, 2))
    values[0, -1] = (1.0, 0.0)
    with pytest.raises(DiscontinuityError):
        lift_deformation(values, regular_grid(2, 2))


def test_applied_increment_moves_samples(random_curve, rng):
    grid = regular_grid(3, 4)
    curve = random_curve(3, 4)
    values = consistent_samples(rng, 3, 4)
    moved = apply_increment(curve, lift_deformation(values, grid), 0.25)
    assert_allclose(sample_curve(moved, grid).points, sample_curve(curve, grid).points + 0.25 * values, atol=1e-10)


def test_applied_increment_moves_the_whole_curve(random_curve, rng):
    ts = np.linspace(0.0, 1.0, 101)
    for patch_count, degree in [(1, 2), (3, 3), (5, 4)]:
        grid = regular_grid(patch_count, degree)
        for _ in range(10):
            curve = random_curve(patch_count, degree)
            inc = lift_deformation(consistent_samples(rng, patch_count, degree), grid)
            h = rng.uniform(-1.0, 1.0)
            moved = evaluate_many(apply_increment(curve, inc, h), ts)
            expected = evaluate_many(curve, ts) + h * evaluate_many(PiecewiseCurve(inc.vectors), ts)
            assert np.max(np.abs(moved - expected)) < 1e-10


@pytest.mark.parametrize("patch_count, degree", [(1, 3), (4, 3), (6, 5)])
def test_lift_is_linear(rng, patch_count, degree):
    grid = regular_grid(patch_count, degree)
    for _ in range(20):
        first = consistent_samples(rng, patch_count, degree, scale=5.0)
        second = consistent_samples(rng, patch_count, degree, scale=5.0)
        a, b = rng.uniform(-3.0, 3.0, size=2)
        combined = lift_deformation(a * first + b * second, grid)
        expected = a * lift_deformation(first, grid).vectors + b * lift_deformation(second, grid).vectors
        assert np.max(np.abs(combined.vectors - expected)) < 1e-10


def test_increment_arithmetic():
    a = ControlIncrement(np.ones((2, 2, 2)), closed=True)
    b = ControlIncrement(np.full((2, 2, 2), 2.0))
    assert_array_equal((a + b).vectors, np.full((2, 2, 2), 3.0))
    assert not (a + b).closed
    assert (2.0 * a).closed
    assert_array_equal((b - a * 2).vectors, np.zeros((2, 2, 2)))
    assert_array_equal((-a).vectors, -np.ones((2, 2, 2)))
    with pytest.raises(ArgumentError):
        a + ControlIncrement(np.ones((3, 2, 2)))


def test_increment_joins_must_match():
    vectors = np.zeros((2, 2, 2))
    vectors[1, 0] = (0.5, 0.0)
    with pytest.raises(DiscontinuityError):
        ControlIncrement(vectors)


def test_close_increment_averages_the_ends():
    vectors = np.zeros((2, 3, 2))
    vectors[0, 0] = (1.0, 0.0)
    vectors[-1, -1] = (0.0, 1.0)
    closed = close_increment(ControlIncrement(vectors))
    assert closed.closed
    assert_array_equal(closed.vectors[0, 0], [0.5, 0.5])
    assert_array_equal(closed.vectors[-1, -1], [0.5, 0.5])


@pytest.mark.parametrize("direction", [1.0, -1.0])
def test_normals_point_outward(circle_grid, direction):
    curve = project_function(lambda t: (np.cos(direction * 2 * np.pi * t), np.sin(direction * 2 * np.pi * t)),
                             circle_grid, closed=True)
    points, normals = outward_normals(curve, circle_grid)
    assert_allclose(np.linalg.norm(normals, axis=2), 1.0, atol=1e-12)
    radial = points / np.linalg.norm(points, axis=2, keepdims=True)
    assert np.min(np.sum(normals * radial, axis=2)) > 0.99


def test_signed_area_orientation():
    square = np.array([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    assert signed_area(square) == 1.0
    assert signed_area(square[::-1]) == -1.0


def test_zero_tangent_is_degenerate():
    grid = regular_grid(2, 2)
    curve = PiecewiseCurve(np.ones((2, 3, 2)))
    with pytest.raises(DegenerateTangentError):
        lift_shape_gradient(curve, lambda p, n: n, grid)


def test_corner_normals_are_averaged():
    grid = regular_grid(4, 1)
    square = PiecewiseCurve([[(0.0, 0.0), (1.0, 0.0)], [(1.0, 0.0), (1.0, 1.0)],
                             [(1.0, 1.0), (0.0, 1.0)], [(0.0, 1.0), (0.0, 0.0)]], closed=True)
    samples = sample_shape_gradient(square, lambda p, n: n, grid)
    assert_array_equal(samples.vectors[0, 0], [-0.5, -0.5])
    assert_array_equal(samples.vectors[0, 1], [0.5, -0.5])
    assert_array_equal(samples.vectors[1, 0], [0.5, -0.5])
    inc = lift_shape_gradient(square, lambda p, n: n, grid)
    assert inc.closed
    assert_array_equal(inc.vectors[0, 0], inc.vectors[-1, -1])


def test_constant_gradient_lifts_to_constant(circle_curve, circle_grid):
    inc = lift_shape_gradient(circle_curve(), lambda p, n: (0.3, -0.2), circle_grid)
    assert_allclose(inc.vectors.reshape(-1, 2), np.tile([0.3, -0.2], (32, 1)), atol=1e-12)


def test_shape_gradient_contract():
    class Radial(ShapeGradient):
        def evaluate(self, points, normals, ts):
            return points * ts[:, None]

    grad = Radial()
    assert_allclose(grad((2.0, 1.0), (1.0, 0.0), t=0.5), [1.0, 0.5])
    assert grad.energy(np.zeros((1, 2)), np.zeros(1)) is None
    assert_allclose(FunctionGradient(lambda p, n: p + n)((1.0, 2.0), (0.0, 1.0)), [1.0, 3.0])


def test_non_finite_gradient_values_are_rejected(circle_curve, circle_grid):
    with pytest.raises(DataError):
        lift_shape_gradient(circle_curve(), lambda p, n: (np.inf, 0.0), circle_grid)
