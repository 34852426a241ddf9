"""Safety verification for neural feedback loops via constraint-aware
refinement of reachable-set over-approximations."""

__version__ = "0.1.0"

from .numerics import Box, Interval, box_center_radius, box_contains
from .compgraph import (
    CompGraph,
    DynamicsSpec,
    Network,
    compose_closed_loop,
    evaluate,
    simulate,
    step_exact,
)
from .crown import (
    BoundsDivergedError,
    LinearBounds,
    NodeRelaxation,
    backward_crown,
    concretize,
    relax_relu,
    relax_trig,
)
from .reach import (
    ConstraintSet,
    DiskAvoid,
    Halfspace,
    Rsoa,
    concrete_reachability,
    eval_box,
    eval_point,
    is_symbolic,
    symbolic_reachability,
)
from .scenario import Scenario
from .engine import CarvConfig, RunContext, VerificationResult, carv, refine, refine_sequence
from .baselines import PartitionGrid, run_hybrid, run_partition, run_symbolic
from .harness import SoundnessReport, SweepRecord, mc_check, sweep_kmax, sweep_radius
from .model_io import SchemaError, load_network, load_scenario, save_network, save_scenario

__all__ = [
    "Box",
    "Interval",
    "box_center_radius",
    "box_contains",
    "CompGraph",
    "DynamicsSpec",
    "Network",
    "compose_closed_loop",
    "evaluate",
    "simulate",
    "step_exact",
    "BoundsDivergedError",
    "LinearBounds",
    "NodeRelaxation",
    "backward_crown",
    "concretize",
    "relax_relu",
    "relax_trig",
    "ConstraintSet",
    "DiskAvoid",
    "Halfspace",
    "Rsoa",
    "concrete_reachability",
    "eval_box",
    "eval_point",
    "is_symbolic",
    "symbolic_reachability",
    "Scenario",
    "CarvConfig",
    "RunContext",
    "VerificationResult",
    "carv",
    "refine",
    "refine_sequence",
    "PartitionGrid",
    "run_hybrid",
    "run_partition",
    "run_symbolic",
    "SoundnessReport",
    "SweepRecord",
    "mc_check",
    "sweep_kmax",
    "sweep_radius",
    "SchemaError",
    "load_network",
    "load_scenario",
    "save_network",
    "save_scenario",
]
