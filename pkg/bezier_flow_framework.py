import argparse
import logging
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import List, Optional, Tuple, Union

from dotenv import load_dotenv
from pydantic import BaseModel, ValidationError

from bezierflow import __version__
from bezierflow.collocation import NODE_KINDS, fit_curve, make_grid, project_function, sample_curve
from bezierflow.documents import (curve_from_json, curve_to_json, polyline_from_csv, samples_from_csv,
                                  samples_to_csv, trajectory_from_json, trajectory_to_json)
from bezierflow.energy import (CircleAttractionGradient, CircleTarget, ImageEnergyConfig, PointAttractionGradient,
                               PolylineTarget)
from bezierflow.errors import ArgumentError, BezierFlowError, exit_code_for
from bezierflow.flow import FlowConfig, Method, Status
from bezierflow.flow_agent import FlowAgent
from bezierflow.images import load_pgm
from bezierflow.segmentation_agent import SEGMENTATION_FLOW, SegmentationAgent
from bezierflow.svg import curves_to_svg, overlay_to_svg

# Colors for logging
BG_BLUE = '\033[44m'
WHITE = '\033[37m'
RESET = '\033[0m'

EXIT_CODES = {
    Status.CONVERGED: 0,
    Status.MAX_ITERS: 4,
    Status.DEGENERATE: 5,
}


def init_logging(level: str = "INFO"):
    root = logging.getLogger()
    root.setLevel(level)
    if any(getattr(handler, "bezierflow", False) for handler in root.handlers):
        return

    handler = logging.StreamHandler(sys.stdout)
    handler.setLevel(level)
    formatter = logging.Formatter(
        "[%(asctime)s] [BezierFlow] [%(levelname)s] %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S %z",
    )
    handler.setFormatter(formatter)
    handler.bezierflow = True
    root.addHandler(handler)


class Settings(BaseModel):
    """
    Runtime knobs read from the environment (and a .env file)
    """
    log_level: str = "INFO"
    show_progress: bool = False

    @classmethod
    def from_env(cls) -> "Settings":
        load_dotenv()
        return cls(
            log_level=os.getenv("BEZIERFLOW_LOG_LEVEL", "INFO").upper(),
            show_progress=os.getenv("BEZIERFLOW_PROGRESS", "0").strip().lower() in ("1", "true", "yes"),
        )


def parse_circle(text: str, what: str) -> Tuple[Tuple[float, float], float]:
    """
    Parse "cx,cy,r" into a center and a radius
    """
    try:
        cx, cy, r = (float(part) for part in text.split(","))
    except ValueError as error:
        raise ArgumentError(f"{what} circle must be cx,cy,r, got {text!r}") from error
    if not (math.isfinite(cx) and math.isfinite(cy) and math.isfinite(r)) or r <= 0.0:
        raise ArgumentError(f"{what} circle needs a finite center and a positive radius, got {text!r}")
    return (cx, cy), r


def split_spec(text: str, kinds: List[str], what: str) -> Tuple[str, str]:
    kind, _, value = text.partition(":")
    if kind not in kinds or not value:
        raise ArgumentError(f"{what} must be one of {', '.join(k + ':...' for k in kinds)}, got {text!r}")
    return kind, value


def build_config(model, what: str, **fields):
    try:
        return model(**fields)
    except ValidationError as error:
        detail = "; ".join(f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in error.errors())
        raise ArgumentError(f"invalid {what}: {detail}") from error


def read_input(path: Union[str, Path], binary: bool = False):
    path = Path(path)
    if not path.is_file():
        raise ArgumentError(f"input file not found: {path}")
    return path.read_bytes() if binary else path.read_text(encoding="utf-8")


def check_output(path: Union[str, Path]) -> Path:
    path = Path(path)
    if not path.parent.resolve().is_dir():
        raise ArgumentError(f"output directory does not exist: {path.parent}")
    return path


def write_atomic(path: Union[str, Path], content: Union[str, bytes]) -> None:
    """
    Write to a temporary file next to the target and rename it into place,
    so the target is either absent or complete
    """
    path = Path(path)
    data = content.encode("utf-8") if isinstance(content, str) else content
    handle = tempfile.NamedTemporaryFile(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp", delete=False)
    try:
        with handle:
            handle.write(data)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(handle.name, path)
    except BaseException:
        if os.path.exists(handle.name):
            os.unlink(handle.name)
        raise


class BezierFlowFramework:

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or Settings.from_env()
        init_logging(self.settings.log_level)

    def log(self, message: str):
        text = BG_BLUE + WHITE + "[BezierFlow Framework] " + message + RESET
        logging.info(text)

    def write(self, path: Path, content: Union[str, bytes]) -> None:
        write_atomic(path, content)
        self.log(f"Wrote {path}")

    def cmd_fit(self, args) -> int:
        out = check_output(args.out)
        grid = make_grid(args.nodes, args.patches, args.degree)
        samples = samples_from_csv(read_input(args.samples), args.patches, args.degree)
        curve = fit_curve(samples, grid)
        self.log(f"Fitted {curve} through {samples}")
        self.write(out, curve_to_json(curve))
        return 0

    def cmd_sample(self, args) -> int:
        out = check_output(args.out)
        curve = curve_from_json(read_input(args.curve))
        grid = make_grid(args.nodes, curve.patch_count, curve.degree)
        self.write(out, samples_to_csv(sample_curve(curve, grid), grid))
        return 0

    def cmd_project(self, args) -> int:
        out = check_output(args.out)
        kind, value = split_spec(args.target, ["circle", "csv"], "target")
        if kind == "circle":
            center, radius = parse_circle(value, "target")
            target, closed = CircleTarget(center, radius), True
        else:
            target, closed = PolylineTarget(polyline_from_csv(read_input(value))), None
        grid = make_grid(args.nodes, args.patches, args.degree)
        curve = project_function(target, grid, closed=closed)
        self.log(f"Projected the {kind} target onto {curve}")
        self.write(out, curve_to_json(curve))
        return 0

    def flow_config(self, args, defaults: FlowConfig = FlowConfig()) -> FlowConfig:
        fields = {
            "method": args.method,
            "step": args.step,
            "max_iters": args.max_iters,
            "tol": args.tol,
            "resample_every": args.resample_every,
            "record_every": args.record_every,
        }
        fields = {key: value for key, value in fields.items() if value is not None}
        return build_config(FlowConfig, "flow settings", **{**defaults.model_dump(), **fields})

    def cmd_flow(self, args) -> int:
        out = check_output(args.out)
        kind, value = split_spec(args.energy, ["circle", "points"], "energy")
        if kind == "circle":
            center, radius = parse_circle(value, "energy")
            grad = CircleAttractionGradient(center, radius)
        else:
            grad = PointAttractionGradient(PolylineTarget(polyline_from_csv(read_input(value))))
        cfg = self.flow_config(args)
        curve = curve_from_json(read_input(args.curve))
        grid = make_grid(args.nodes, curve.patch_count, curve.degree)
        trajectory = FlowAgent(cfg, self.settings.show_progress).run(curve, grad, grid)
        self.write(out, trajectory_to_json(trajectory))
        return EXIT_CODES[trajectory.status]

    def cmd_segment(self, args) -> int:
        out = check_output(args.out)
        svg_out = check_output(args.svg) if args.svg else None
        center, radius = parse_circle(split_spec(args.init, ["circle"], "init")[1], "init")
        energy = build_config(ImageEnergyConfig, "image energy settings", sigma=args.sigma, balloon=args.balloon,
                              edge_contrast=args.edge_contrast)
        cfg = self.flow_config(args, SEGMENTATION_FLOW)
        img = load_pgm(read_input(args.image, binary=True))
        grid = make_grid(args.nodes, args.patches, args.degree)
        agent = SegmentationAgent(energy, cfg, self.settings.show_progress)
        result = agent.segment(img, center, radius, grid)
        self.write(out, curve_to_json(result.contour))
        if svg_out:
            self.write(svg_out, overlay_to_svg(img, result.contour, result.initial))
        return EXIT_CODES[result.trajectory.status]

    def cmd_export_svg(self, args) -> int:
        out = check_output(args.out)
        if not args.curve and not args.traj:
            raise ArgumentError("export-svg needs --curve, --traj or both")
        curve = curve_from_json(read_input(args.curve)) if args.curve else None
        trajectory = trajectory_from_json(read_input(args.traj)) if args.traj else None
        self.write(out, curves_to_svg(curve, trajectory, args.every))
        return 0

    def run(self, args) -> int:
        command = getattr(self, "cmd_" + args.command.replace("-", "_"))
        self.log(f"Running {args.command}")
        return command(args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bezierflow",
                                     description="Piecewise Bezier curves, collocation and shape-gradient flows")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    def grid_flags(command, shape=True):
        if shape:
            command.add_argument("--patches", type=int, required=True, help="number of patches N+1")
            command.add_argument("--degree", type=int, required=True, help="patch degree D")
        command.add_argument("--nodes", choices=sorted(NODE_KINDS), default="regular",
                             help="local collocation nodes")

    def flow_flags(command):
        command.add_argument("--method", choices=[m.value for m in Method])
        command.add_argument("--step", type=float)
        command.add_argument("--max-iters", type=int)
        command.add_argument("--tol", type=float)
        command.add_argument("--resample-every", type=int)
        command.add_argument("--record-every", type=int)

    fit = commands.add_parser("fit", help="fit a curve through sample points")
    fit.add_argument("--samples", required=True)
    grid_flags(fit)
    fit.add_argument("--out", required=True)

    sample = commands.add_parser("sample", help="sample a curve at the grid nodes")
    sample.add_argument("--curve", required=True)
    grid_flags(sample, shape=False)
    sample.add_argument("--out", required=True)

    project = commands.add_parser("project", help="project a circle or polyline onto piecewise curves")
    project.add_argument("--target", required=True, help="circle:cx,cy,r or csv:<path>")
    grid_flags(project)
    project.add_argument("--out", required=True)

    flow = commands.add_parser("flow", help="run a gradient flow of an analytic energy")
    flow.add_argument("--curve", required=True)
    flow.add_argument("--energy", required=True, help="circle:cx,cy,r or points:<csv>")
    grid_flags(flow, shape=False)
    flow_flags(flow)
    flow.add_argument("--out", required=True)

    segment = commands.add_parser("segment", help="segment a PGM image with an inflating contour")
    segment.add_argument("--image", required=True)
    segment.add_argument("--init", required=True, help="circle:cx,cy,r")
    grid_flags(segment)
    segment.add_argument("--sigma", type=float, default=2.0)
    segment.add_argument("--balloon", type=float, default=0.5)
    segment.add_argument("--edge-contrast", type=float, default=0.1)
    flow_flags(segment)
    segment.add_argument("--out", required=True)
    segment.add_argument("--svg")

    export = commands.add_parser("export-svg", help="render a curve or trajectory as SVG")
    export.add_argument("--curve")
    export.add_argument("--traj")
    export.add_argument("--every", type=int, default=1)
    export.add_argument("--out", required=True)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as stop:
        return int(stop.code or 0)
    try:
        return BezierFlowFramework().run(args)
    except BezierFlowError as error:
        logging.error(str(error))
        sys.stderr.write(f"bezierflow {args.command}: {error}\n")
        return exit_code_for(error)
    except OSError as error:
        logging.error(str(error))
        sys.stderr.write(f"bezierflow {args.command}: {error}\n")
        return 1


if __name__=="__main__":
    sys.exit(main())
