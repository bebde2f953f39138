from typing import Optional

from bezierflow.agent import Agent
from bezierflow.bezier import PiecewiseCurve
from bezierflow.collocation import SamplingGrid
from bezierflow.deform import ShapeGradientEvaluator, as_shape_gradient
from bezierflow.flow import FlowConfig, Iterate, Status, Trajectory, integrate


class FlowAgent(Agent):

    name = "Flow Agent"
    color = Agent.CYAN
    REPORT_EVERY = 100

    def __init__(self, cfg: FlowConfig, show_progress: bool = False):
        """
        Set up an agent that runs flows with one integration config
        :param cfg: integrator, step size, budget and tolerance
        :param show_progress: show a tqdm bar while integrating
        """
        self.cfg = cfg
        self.show_progress = show_progress
        self.log(f"Flow Agent is ready: {cfg.method.value} with step {cfg.step}, "
                 f"up to {cfg.max_iters} iterations, tol {cfg.tol}")

    def report(self, iterate: Iterate) -> None:
        if iterate.iteration and iterate.iteration % self.REPORT_EVERY == 0:
            self.log(f"Flow Agent at iteration {iterate.iteration}: stationarity {iterate.stationarity:.3e}")

    def run(self, curve: PiecewiseCurve, grad: ShapeGradientEvaluator, grid: SamplingGrid,
            cfg: Optional[FlowConfig] = None) -> Trajectory:
        """
        Integrate the descent field of a shape gradient from a starting curve
        :param curve: the starting curve, matching the grid
        :param grad: the shape gradient to descend
        :param grid: the sampling grid used to lift the gradient
        :param cfg: overrides the agent's config for this run
        :return: the recorded trajectory with its terminal status
        """
        cfg = cfg or self.cfg
        grad = as_shape_gradient(grad)
        with self.stage(f"descending the {grad.name} from {curve}"):
            trajectory = integrate(curve, grad, grid, cfg, show_progress=self.show_progress, callback=self.report)
        if trajectory.status == Status.CONVERGED:
            self.log(f"Flow Agent converged after {trajectory.iterations} iteration(s)")
        elif trajectory.status == Status.DEGENERATE:
            self.warn(f"Flow Agent stopped on a degenerate curve after {trajectory.iterations} iteration(s)")
        else:
            self.log(f"Flow Agent stopped with status {trajectory.status.value} "
                     f"after {trajectory.iterations} iteration(s)")
        return trajectory
