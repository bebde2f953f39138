from typing import NamedTuple, Optional

import numpy as np

from bezierflow.agent import Agent
from bezierflow.bezier import PiecewiseCurve
from bezierflow.collocation import SamplingGrid, project_function
from bezierflow.energy import CircleTarget, ImageEnergyConfig, ImageShapeGradient
from bezierflow.errors import ArgumentError
from bezierflow.flow import FlowConfig, Trajectory
from bezierflow.flow_agent import FlowAgent
from bezierflow.images import ScalarField

SEGMENTATION_FLOW = FlowConfig(method="rk4", step=0.5, max_iters=2000, tol=1e-2, resample_every=25)


class Segmentation(NamedTuple):
    initial: PiecewiseCurve
    trajectory: Trajectory

    @property
    def contour(self) -> PiecewiseCurve:
        return self.trajectory.final.curve


class SegmentationAgent(Agent):

    name = "Segmentation Agent"
    color = Agent.GREEN

    def __init__(self, energy: ImageEnergyConfig, flow: FlowConfig = SEGMENTATION_FLOW, show_progress: bool = False):
        """
        Create the Flow Agent that this agent hands the contour evolution to
        """
        self.log("Segmentation Agent is initializing")
        self.energy = energy
        self.flow = FlowAgent(flow, show_progress)
        self.log("Segmentation Agent is ready")

    @staticmethod
    def check_circle(img: ScalarField, center, radius: float) -> None:
        cx, cy = (float(c) for c in center)
        radius = float(radius)
        if not np.isfinite([cx, cy, radius]).all() or radius <= 0.0:
            raise ArgumentError(f"initial circle needs a finite center and a positive radius, got {center}, {radius}")
        if cx - radius < 0.0 or cy - radius < 0.0 or cx + radius > img.width - 1 or cy + radius > img.height - 1:
            raise ArgumentError(f"initial circle ({cx}, {cy}, r={radius}) does not fit inside the "
                                f"{img.width}x{img.height} image")

    def initial_contour(self, img: ScalarField, center, radius: float, grid: SamplingGrid) -> PiecewiseCurve:
        self.check_circle(img, center, radius)
        return project_function(CircleTarget(center, radius), grid, closed=True)

    def segment(self, img: ScalarField, center, radius: float, grid: SamplingGrid,
                flow: Optional[FlowConfig] = None) -> Segmentation:
        """
        Run the full workflow:
        1. Project the initial circle onto the piecewise curves of the grid
        2. Build the edge energy of the image
        3. Evolve the contour with the Flow Agent
        :param img: the grayscale image, values in [0, 1]
        :param center: center of the initial circle, pixel coordinates
        :param radius: radius of the initial circle, pixels
        :param grid: the sampling grid of the contour
        :param flow: overrides the integration config for this run
        :return: the initial contour and the recorded trajectory
        """
        self.log(f"Segmentation Agent is kicking off a run on {img}")
        initial = self.initial_contour(img, center, radius, grid)
        with self.stage(f"building the edge energy (sigma {self.energy.sigma}, balloon {self.energy.balloon})"):
            grad = ImageShapeGradient(self.energy, img)
        trajectory = self.flow.run(initial, grad, grid, flow)
        self.log(f"Segmentation Agent has completed a run with status {trajectory.status.value}")
        return Segmentation(initial, trajectory)
