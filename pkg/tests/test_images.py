import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from bezierflow.errors import ArgumentError, FormatError
from bezierflow.images import (ScalarField, check_sigma, edge_stopping_field, gaussian_gradient_magnitude, load_pgm,
                               write_pgm)


def test_load_binary_pgm():
    data = b"P5\n3 2\n255\n" + bytes([0, 51, 255, 102, 204, 0])
    img = load_pgm(data)
    assert (img.width, img.height) == (3, 2)
    assert_array_equal(img.values, np.array([[0, 51, 255], [102, 204, 0]]) / 255.0)


def test_load_ascii_pgm_with_comments():
    data = b"P2\n# made by hand\n2 2 # size\n4\n0 1\n2 4\n"
    assert_array_equal(load_pgm(data).values, [[0.0, 0.25], [0.5, 1.0]])


def test_bad_magic():
    with pytest.raises(FormatError) as error:
        load_pgm(b"P6\n2 2\n255\n" + bytes(12))
    assert error.value.offset == 0


def test_truncated_raster_reports_sizes():
    with pytest.raises(FormatError) as error:
        load_pgm(b"P5\n4 3\n255\n" + bytes(5))
    assert "expected 12 bytes, received 5" in str(error.value)
    assert error.value.offset == len(b"P5\n4 3\n255\n") + 5


@pytest.mark.parametrize("data", [
    b"P5\n2 2\n0\n" + bytes(4),
    b"P5\n2 2\n256\n" + bytes(4),
    b"P5\n2 x\n255\n" + bytes(4),
    b"P2\n2 2\n10\n1 2 3 11\n",
    b"P2\n2 2\n10\n1 2 3\n",
    b"P5\n1 2\n255\n" + bytes(2),
])
def test_malformed_headers_and_samples(data):
    with pytest.raises(FormatError):
        load_pgm(data)


def test_write_then_load_preserves_levels():
    levels = np.arange(16, dtype=float).reshape(4, 4) * 17.0 / 255.0
    assert_array_equal(load_pgm(write_pgm(ScalarField(levels))).values, levels)


def test_bilinear_sampling():
    field = ScalarField([[0.0, 1.0], [2.0, 3.0]])
    assert_allclose(field.sample([(0.5, 0.5), (1.0, 0.0), (0.0, 1.0)]), [1.5, 1.0, 2.0])
    assert_allclose(field.sample([(-5.0, 0.0), (9.0, 9.0)]), [0.0, 3.0])
    assert_array_equal(field.contains([(0.5, 0.5), (1.5, 0.5)]), [True, False])


def test_sigma_range():
    assert check_sigma(0.5) == 0.5
    with pytest.raises(ArgumentError):
        check_sigma(0.4)
    with pytest.raises(ArgumentError):
        check_sigma(10.5)


def test_constant_image_has_no_gradient():
    magnitude = gaussian_gradient_magnitude(ScalarField(np.full((20, 30), 0.7)), 2.0)
    assert np.max(np.abs(magnitude.values)) < 1e-12


def test_step_edge_is_symmetric():
    values = np.zeros((32, 32))
    values[:, 16:] = 1.0
    magnitude = gaussian_gradient_magnitude(ScalarField(values), 1.5).values
    assert set(np.argmax(magnitude, axis=1)) <= {15, 16}
    for k in range(6):
        assert_allclose(magnitude[:, 15 - k], magnitude[:, 16 + k], atol=1e-12)
    assert np.all(np.diff(magnitude[16, 16:22]) < 0.0)


def test_impulse_response():
    values = np.zeros((33, 33))
    values[16, 16] = 1.0
    magnitude = gaussian_gradient_magnitude(ScalarField(values), 1.0).values
    offsets = np.arange(-3, 4)
    kernel = np.exp(-0.5 * offsets ** 2)
    kernel /= kernel.sum()
    smoothed = np.zeros((33, 33))
    smoothed[13:20, 13:20] = np.outer(kernel, kernel)
    rows, columns = np.gradient(smoothed)
    assert_allclose(magnitude[8:25, 8:25], np.hypot(columns, rows)[8:25, 8:25], atol=1e-6)


def test_translation_equivariance(rng):
    values = rng.uniform(0.0, 1.0, size=(40, 40))
    shifted = np.empty_like(values)
    shifted[:, 1:] = values[:, :-1]
    shifted[:, 0] = values[:, 0]
    original = gaussian_gradient_magnitude(ScalarField(values), 1.5).values
    moved = gaussian_gradient_magnitude(ScalarField(shifted), 1.5).values
    assert_allclose(moved[:, 11:30], original[:, 10:29], atol=1e-12)


def test_edge_stopping_field():
    assert_array_equal(edge_stopping_field(ScalarField(np.zeros((3, 3)))).values, np.ones((3, 3)))
    magnitude = ScalarField([[0.0, 0.25, 0.5], [1.0, 0.75, 0.1]])
    stopping = edge_stopping_field(magnitude).values
    assert stopping[1, 0] == 0.5
    order = np.argsort(magnitude.values.reshape(-1))
    assert np.all(np.diff(stopping.reshape(-1)[order]) < 0.0)
    assert np.all((stopping > 0.0) & (stopping <= 1.0))


def test_edge_contrast_sharpens_the_stopping_field():
    magnitude = ScalarField([[0.0, 0.1], [0.5, 1.0]])
    stopping = edge_stopping_field(magnitude, contrast=0.1).values
    assert stopping[0, 1] == 0.5
    assert stopping[1, 1] < 0.01
    with pytest.raises(ArgumentError):
        edge_stopping_field(magnitude, contrast=0.0)
