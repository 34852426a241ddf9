"""Comparison methods: uniform partitioning, pure symbolic, hybrid-symbolic."""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass

import numpy as np

from .engine import RunContext, VerificationResult
from .numerics import Box
from .reach import Rsoa, eval_box
from .scenario import Scenario

__all__ = ["PartitionGrid", "run_partition", "run_symbolic", "run_hybrid"]

log = logging.getLogger("carv.baselines")


@dataclass(frozen=True)
class PartitionGrid:
    """Uniform split counts per state dimension, e.g. (6, 6, 18)."""

    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if not counts or any(c < 1 for c in counts):
            raise ValueError("all partition counts must be >= 1")
        object.__setattr__(self, "counts", counts)

    @property
    def num_cells(self) -> int:
        return int(np.prod(self.counts))


def split_box(box: Box, grid: PartitionGrid) -> list[Box]:
    """Uniform grid cells covering the box.  Edges come from linspace so the
    outer faces reproduce the original bounds bit-exactly."""
    if len(grid.counts) != box.dim:
        raise ValueError("grid dimension does not match the state dimension")
    edges = [
        np.linspace(box.lower[d], box.upper[d], grid.counts[d] + 1)
        for d in range(box.dim)
    ]
    cells = []
    for idx in itertools.product(*(range(c) for c in grid.counts)):
        lower = np.array([edges[d][i] for d, i in enumerate(idx)])
        upper = np.array([edges[d][i + 1] for d, i in enumerate(idx)])
        cells.append(Box(lower, upper))
    return cells


def _hull(boxes: list[Box]) -> Box:
    lower = np.min(np.stack([b.lower for b in boxes]), axis=0)
    upper = np.max(np.stack([b.upper for b in boxes]), axis=0)
    return Box(lower, upper)


def run_partition(scenario: Scenario, grid: PartitionGrid) -> VerificationResult:
    """Chain concrete RSOAs independently for every cell of a uniform split
    of the initial set.  Safe iff every cell passes at every step; the
    reported rsoas are per-step hulls of the cell boxes."""
    ctx = RunContext.for_scenario(scenario)
    start = time.monotonic()
    cells = split_box(scenario.x0, grid)
    per_t_boxes: list[list[Box]] = [[c for c in cells]]
    current = [Rsoa(c, 0, "initial") for c in cells]
    for t in range(1, scenario.t_f + 1):
        current = [ctx.concrete(r) for r in current]
        per_t_boxes.append([r.box for r in current])

    safe = True
    failure_time = None
    for t, boxes in enumerate(per_t_boxes):
        if not all(eval_box(scenario.constraints, b) for b in boxes):
            safe = False
            failure_time = t
            break

    rsoas = [Rsoa(_hull(per_t_boxes[0]), 0, "initial")]
    for t in range(1, scenario.t_f + 1):
        rsoas.append(Rsoa(_hull(per_t_boxes[t]), t, "concrete", anchor_t=t - 1))
    ctx.stats.total_seconds = time.monotonic() - start
    return VerificationResult(
        safe=safe,
        rsoas=rsoas,
        stats=ctx.stats,
        method="part",
        failure_time=failure_time,
        partition_boxes=per_t_boxes,
    )


def run_symbolic(
    scenario: Scenario, budget_secs: float | None = None
) -> VerificationResult:
    """Bound every step directly from the initial set with one symbolic pass
    per step.  An optional wall-clock budget yields a partial, timed-out
    result instead of an error."""
    ctx = RunContext.for_scenario(scenario)
    start = time.monotonic()
    rsoas: list[Rsoa] = [Rsoa(scenario.x0, 0, "initial")]
    timed_out = False
    for t in range(1, scenario.t_f + 1):
        if budget_secs is not None and time.monotonic() - start > budget_secs:
            log.info("symbolic budget exhausted after %d steps", t - 1)
            timed_out = True
            break
        rsoas.append(ctx.symbolic(rsoas[0], t))

    safe = True
    failure_time = None
    for r in rsoas:
        if not eval_box(scenario.constraints, r.box):
            safe = False
            failure_time = r.t
            break
    if timed_out:
        safe = False  # cannot claim safety from a partial run
    ctx.stats.total_seconds = time.monotonic() - start
    return VerificationResult(
        safe=safe,
        rsoas=rsoas,
        stats=ctx.stats,
        method="symb",
        failure_time=failure_time,
        timed_out=timed_out,
    )


def run_hybrid(scenario: Scenario, k_max: int | None = None) -> VerificationResult:
    """Symbolic bounds on the fixed schedule t = k_max, 2*k_max, ... from the
    previous schedule anchor; concrete bounds fill the gaps."""
    k_max = scenario.k_max if k_max is None else k_max
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    ctx = RunContext.for_scenario(scenario)
    start = time.monotonic()
    rsoas: list[Rsoa] = [Rsoa(scenario.x0, 0, "initial")]
    last_anchor = 0
    for t in range(1, scenario.t_f + 1):
        if t % k_max == 0:
            rsoas.append(ctx.symbolic(rsoas[last_anchor], t - last_anchor))
            last_anchor = t
        else:
            rsoas.append(ctx.concrete(rsoas[t - 1]))

    safe = True
    failure_time = None
    for r in rsoas:
        if not eval_box(scenario.constraints, r.box):
            safe = False
            failure_time = r.t
            break
    ctx.stats.total_seconds = time.monotonic() - start
    return VerificationResult(
        safe=safe,
        rsoas=rsoas,
        stats=ctx.stats,
        method="hybr",
        failure_time=failure_time,
    )
