"""The constraint-aware verification loop and its refinement routines.

``carv`` walks the horizon with cheap concrete bounds and only spends time
on symbolic recomputation when a set conflicts with the constraints:
``refine`` retries the violating set from progressively earlier symbolic
anchors, and ``refine_sequence`` rebuilds a chain of symbolic anchors at
``k_max``-sized steps back to the initial set when no usable anchor exists.
"""

from __future__ import annotations

import logging
import time
from collections import Counter
from dataclasses import dataclass, field

from .compgraph import DynamicsSpec, Network
from .numerics import Box
from .reach import (
    ConstraintSet,
    GraphCache,
    Rsoa,
    concrete_reachability,
    eval_box,
    is_symbolic,
    symbolic_reachability,
)
from .scenario import Scenario

__all__ = [
    "BoundStats",
    "CarvConfig",
    "VerificationResult",
    "RunContext",
    "carv",
    "refine",
    "refine_sequence",
]

log = logging.getLogger("carv.engine")


@dataclass
class BoundStats:
    """Counts and timings of every bound-engine invocation."""

    concrete_calls: int = 0
    symbolic_calls: Counter = field(default_factory=Counter)  # horizon -> count
    step_seconds: list = field(default_factory=list)
    total_seconds: float = 0.0

    @property
    def symbolic_total(self) -> int:
        return sum(self.symbolic_calls.values())


@dataclass(frozen=True)
class CarvConfig:
    t_f: int
    k_max: int

    def __post_init__(self):
        if self.t_f < 1:
            raise ValueError("t_f must be >= 1")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")


@dataclass
class VerificationResult:
    """Outcome of one verification run.

    ``safe=False`` with ``failure_time=None`` only occurs for budget-limited
    partial runs (``timed_out=True``).
    """

    safe: bool
    rsoas: list[Rsoa]
    stats: BoundStats
    method: str
    failure_time: int | None = None
    timed_out: bool = False
    partition_boxes: list[list[Box]] | None = None  # per t, per cell (part only)


class RunContext:
    """Scenario-scoped machinery shared by the verification algorithms:
    the graph cache plus stats recording around every bound call."""

    def __init__(self, dyn: DynamicsSpec, policy: Network):
        self.dyn = dyn
        self.policy = policy
        self.cache = GraphCache(dyn, policy)
        self.stats = BoundStats()

    @classmethod
    def for_scenario(cls, scenario: Scenario) -> "RunContext":
        return cls(scenario.dyn, scenario.policy)

    def concrete(self, prev: Rsoa) -> Rsoa:
        t0 = time.monotonic()
        out = concrete_reachability(prev, self.dyn, self.policy, self.cache)
        self.stats.concrete_calls += 1
        self.stats.step_seconds.append(time.monotonic() - t0)
        return out

    def symbolic(self, anchor: Rsoa, k: int) -> Rsoa:
        t0 = time.monotonic()
        out = symbolic_reachability(anchor, self.dyn, self.policy, k, self.cache)
        self.stats.symbolic_calls[k] += 1
        self.stats.step_seconds.append(time.monotonic() - t0)
        return out


def refine(
    rsoas: list[Rsoa],
    constraints: ConstraintSet,
    k_max: int,
    ctx: RunContext,
) -> list[Rsoa]:
    """Deconflict the last set by symbolic recomputation from earlier anchors.

    Walks k from t-2 down to t_min = max(t - k_max, 0).  Whenever the set at
    k is symbolic (or the initial set), the violating set is recomputed
    symbolically from it; each attempt replaces the previous one and the loop
    stops as soon as the constraints are satisfied.  If k reaches t_min with
    no symbolic anchor available, the whole prefix is refined by
    :func:`refine_sequence`.
    """
    rsoas = list(rsoas)
    t = rsoas[-1].t
    t_min = max(t - k_max, 0)
    k = t - 2
    while k >= t_min and not eval_box(constraints, rsoas[t].box):
        if is_symbolic(rsoas[k]):
            log.debug("refine: symbolic attempt t=%d from anchor k=%d", t, k)
            rsoas[t] = ctx.symbolic(rsoas[k], t - k)
        elif k == t_min:
            log.debug("refine: falling back to refine_sequence at t=%d", t)
            rsoas = refine_sequence(rsoas, k_max, ctx)
        k -= 1
    return rsoas


def refine_sequence(rsoas: list[Rsoa], k_max: int, ctx: RunContext) -> list[Rsoa]:
    """Recursively rebuild symbolic anchors at k_max-sized steps back to 0.

    After the call, the sets at indices t, t - k_max, t - 2*k_max, ... are
    symbolic and each is bounded from the previous anchor in one pass.
    """
    rsoas = list(rsoas)
    t = rsoas[-1].t
    t_min = max(t - k_max, 0)
    if t_min == 0:
        rsoas[t] = ctx.symbolic(rsoas[0], t)
    else:
        rsoas[: t_min + 1] = refine_sequence(rsoas[: t_min + 1], k_max, ctx)
        # the set at t_min is symbolic now
        rsoas[t] = ctx.symbolic(rsoas[t_min], t - t_min)
    return rsoas


def carv(scenario: Scenario, ctx: RunContext | None = None) -> VerificationResult:
    """Verify the scenario over its horizon, refining only on conflict."""
    ctx = ctx or RunContext.for_scenario(scenario)
    c = scenario.constraints
    start = time.monotonic()
    rsoas: list[Rsoa] = [Rsoa(scenario.x0, 0, "initial")]
    safe = True
    failure_time: int | None = None
    for t in range(1, scenario.t_f + 1):
        try:
            rsoas.append(ctx.concrete(rsoas[t - 1]))
            if not eval_box(c, rsoas[t].box):
                log.info("conflict at t=%d, refining", t)
                rsoas = refine(rsoas, c, scenario.k_max, ctx)
        except ArithmeticError as exc:
            raise ArithmeticError(f"bound computation failed at t={t}: {exc}") from exc
        if not eval_box(c, rsoas[t].box):
            safe = False
            failure_time = t
            break
    ctx.stats.total_seconds = time.monotonic() - start
    return VerificationResult(
        safe=safe,
        rsoas=rsoas,
        stats=ctx.stats,
        method="carv",
        failure_time=failure_time,
    )
