import numpy as np
import pytest

from bezierflow.bezier import PiecewiseCurve
from bezierflow.collocation import project_function, regular_grid
from bezierflow.energy import CircleTarget
from bezierflow.images import ScalarField


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_curve(rng):
    """
    Factory for random piecewise curves with consistent joins
    """
    def make(patch_count, degree, low=-10.0, high=10.0, closed=False):
        net = rng.uniform(low, high, size=(patch_count, degree + 1, 2))
        for i in range(patch_count - 1):
            net[i + 1, 0] = net[i, -1]
        if closed:
            net[-1, -1] = net[0, 0]
        return PiecewiseCurve(net, closed)
    return make


@pytest.fixture
def circle_grid():
    return regular_grid(8, 3)


@pytest.fixture
def circle_curve(circle_grid):
    """
    Factory for projected circles on the 8-patch cubic grid
    """
    def make(radius=1.0, center=(0.0, 0.0)):
        return project_function(CircleTarget(center, radius), circle_grid, closed=True)
    return make


@pytest.fixture
def disk_image(rng):
    """
    128x128 white disk of radius 30 at the center on black, with Gaussian noise of deviation 0.02
    """
    ys, xs = np.mgrid[0:128, 0:128]
    disk = (np.hypot(xs - 64.0, ys - 64.0) <= 30.0).astype(float)
    return ScalarField(disk + rng.normal(0.0, 0.02, size=disk.shape))
