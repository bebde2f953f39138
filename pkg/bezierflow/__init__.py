"""
bezierflow: piecewise Bezier curves, collocation fitting and shape-gradient flows on control nets
"""
__version__ = "0.1.0"

from bezierflow.bezier import (ControlPolygon, PiecewiseCurve, bernstein_basis, bernstein_row, de_casteljau,
                               eval_bernstein_form, eval_patch_derivative, eval_piecewise, monomial_to_bernstein)
from bezierflow.collocation import (SampleMatrix, SamplingGrid, chebyshev_grid, collocation_matrix, fit_curve,
                                    fit_patch, make_grid, project_function, regular_grid, sample_curve)
from bezierflow.deform import (ControlIncrement, ShapeGradient, apply_increment, lift_deformation,
                               lift_shape_gradient, stationarity_norm)
from bezierflow.energy import (ImageEnergyConfig, circle_attraction_gradient, image_shape_gradient,
                               point_attraction_gradient)
from bezierflow.errors import BezierFlowError
from bezierflow.flow import FlowConfig, Method, Status, Trajectory, arc_length_resample, integrate
from bezierflow.images import ScalarField, edge_stopping_field, gaussian_gradient_magnitude, load_pgm
