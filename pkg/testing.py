import math
from typing import Callable, Optional, Sequence

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from bezierflow.bezier import PiecewiseCurve
from bezierflow.collocation import SamplingGrid
from bezierflow.deform import ShapeGradientEvaluator
from bezierflow.flow import rk4_step

GREEN = "\033[92m"
YELLOW = "\033[93m"
RED = "\033[91m"
RESET = "\033[0m"
COLOR_MAP = {"red": RED, "orange": YELLOW, "green": GREEN}

Stepper = Callable[[PiecewiseCurve, ShapeGradientEvaluator, SamplingGrid, float], PiecewiseCurve]


class Tester:
    """
    Measures the convergence order of a stepper: integrates to a fixed horizon with a ladder of
    step sizes, compares against a much finer RK4 run and fits the log-log slope of the errors
    """

    __test__ = False

    def __init__(self, stepper: Stepper, curve: PiecewiseCurve, grad: ShapeGradientEvaluator,
                 grid: SamplingGrid, steps: Sequence[float] = (0.2, 0.1, 0.05, 0.025), horizon: float = 0.4,
                 refinement: int = 64, title: Optional[str] = None):
        self.stepper = stepper
        self.curve = curve
        self.grad = grad
        self.grid = grid
        self.steps = list(steps)
        self.horizon = horizon
        self.refinement = refinement
        self.title = title or stepper.__name__.replace("_", " ").title()
        self.errors = []
        self.colors = []
        self.slope = None

    def advance(self, stepper: Stepper, h: float) -> PiecewiseCurve:
        count = round(self.horizon / h)
        if not math.isclose(count * h, self.horizon, rel_tol=1e-9):
            raise ValueError(f"step {h} does not divide the horizon {self.horizon}")
        curve = self.curve
        for _ in range(count):
            curve = stepper(curve, self.grad, self.grid, h)
        return curve

    def color_for(self, ratio: Optional[float]):
        if ratio is None or ratio > 1.5:
            return "green"
        elif ratio > 1.0:
            return "orange"
        else:
            return "red"

    def run_step(self, i: int, reference: PiecewiseCurve):
        h = self.steps[i]
        result = self.advance(self.stepper, h)
        error = float(np.max(np.linalg.norm(result.net - reference.net, axis=2)))
        ratio = self.errors[-1] / error if self.errors and error > 0.0 else None
        color = self.color_for(ratio)
        self.errors.append(error)
        self.colors.append(color)
        shown = f"{ratio:,.2f}" if ratio is not None else "-"
        print(f"{COLOR_MAP[color]}{i+1}: h: {h:.4g} Steps: {round(self.horizon / h)} "
              f"Error: {error:.3e} Ratio: {shown}{RESET}")

    def chart(self, title: str, path: str):
        plt.figure(figsize=(8, 6))
        plt.loglog(self.steps, self.errors, marker="o", color="deepskyblue", lw=2)
        plt.scatter(self.steps, self.errors, s=30, c=self.colors, zorder=3)
        plt.xlabel("Step size h")
        plt.ylabel("Error at the horizon")
        plt.title(title)
        plt.savefig(path)
        plt.close()

    def report(self, chart: Optional[str] = None) -> float:
        self.slope = float(np.polyfit(np.log(self.steps), np.log(self.errors), 1)[0])
        title = f"{self.title} Order={self.slope:.2f} Horizon={self.horizon}"
        print(title)
        if chart:
            self.chart(title, chart)
        return self.slope

    def run(self, chart: Optional[str] = None) -> float:
        reference = self.advance(rk4_step, min(self.steps) / self.refinement)
        self.errors, self.colors = [], []
        for i in range(len(self.steps)):
            self.run_step(i, reference)
        return self.report(chart)

    @classmethod
    def test(cls, stepper: Stepper, curve: PiecewiseCurve, grad: ShapeGradientEvaluator, grid: SamplingGrid,
             **kwargs) -> float:
        chart = kwargs.pop("chart", None)
        return cls(stepper, curve, grad, grid, **kwargs).run(chart)
