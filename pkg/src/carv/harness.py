"""Monte Carlo soundness checks and experiment sweeps.

The MC check is a falsifier, not a statistical guarantee: sampled
trajectories must stay inside every reported set, and any sampled constraint
violation must coincide with a negative verification verdict.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import PartitionGrid, run_hybrid, run_partition, run_symbolic
from .engine import VerificationResult, carv
from .numerics import Box
from .reach import ConstraintSet, DiskAvoid, Halfspace, eval_box
from .compgraph import simulate_batch
from .scenario import Scenario

__all__ = ["SoundnessReport", "SweepRecord", "mc_check", "sweep_kmax", "sweep_radius"]

log = logging.getLogger("carv.harness")


@dataclass(frozen=True)
class SoundnessReport:
    samples: int
    max_violation: tuple[float, ...]  # worst containment slack per t (<=0 inside)
    constraint_hits: tuple[tuple[int, int], ...]  # (t, sample index)

    @property
    def worst(self) -> float:
        return max(self.max_violation)

    def passes(self, tol: float = 1e-9) -> bool:
        return self.worst <= tol


@dataclass(frozen=True)
class SweepRecord:
    parameter: float
    method: str
    verified: bool
    seconds: float
    concrete_calls: int
    symbolic_calls: int
    error: str | None = None


def sample_box(box: Box, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(box.lower, box.upper, size=(n, box.dim))


def _points_satisfy(c: ConstraintSet, pts: np.ndarray) -> np.ndarray:
    """Vectorized conjunction of all constraint items over points (N, n)."""
    ok = np.ones(pts.shape[0], dtype=bool)
    for item in c.items:
        if isinstance(item, Halfspace):
            ok &= pts @ item.normal >= item.offset
        elif isinstance(item, DiskAvoid):
            d = pts[:, list(item.coords)] - item.center
            ok &= np.sum(d * d, axis=1) >= item.radius**2
    return ok


def mc_check(
    scenario: Scenario, result: VerificationResult, n: int, seed: int
) -> SoundnessReport:
    """Propagate n uniform samples from the initial set and record, per step,
    the worst containment slack against the reported sets plus any sampled
    constraint violations.  Deterministic given (scenario, n, seed)."""
    if not result.rsoas:
        raise ValueError("result has no rsoas to check")
    horizon = result.rsoas[-1].t
    x0 = sample_box(scenario.x0, n, seed)
    traj = simulate_batch(scenario.dyn, scenario.policy, x0, horizon)

    max_violation = []
    hits: list[tuple[int, int]] = []
    for r in result.rsoas:
        pts = traj[r.t]
        slack = np.maximum(r.box.lower - pts, pts - r.box.upper)
        max_violation.append(float(np.max(slack)))
        bad = np.nonzero(~_points_satisfy(scenario.constraints, pts))[0]
        hits.extend((r.t, int(i)) for i in bad)
    return SoundnessReport(n, tuple(max_violation), tuple(hits))


def _run_method(
    scenario: Scenario,
    method: str,
    grid: PartitionGrid | None = None,
    budget_secs: float | None = None,
) -> VerificationResult:
    if method == "carv":
        return carv(scenario)
    if method == "hybr":
        return run_hybrid(scenario)
    if method == "symb":
        return run_symbolic(scenario, budget_secs=budget_secs)
    if method == "part":
        if grid is None:
            raise ValueError("method 'part' requires a partition grid")
        return run_partition(scenario, grid)
    raise ValueError(f"unknown method {method!r}")


def _record(parameter: float, method: str, result: VerificationResult) -> SweepRecord:
    return SweepRecord(
        parameter=parameter,
        method=method,
        verified=result.safe,
        seconds=result.stats.total_seconds,
        concrete_calls=result.stats.concrete_calls,
        symbolic_calls=result.stats.symbolic_total,
    )


def sweep_kmax(
    scenario: Scenario, methods: list[str], k_values: list[int]
) -> list[SweepRecord]:
    """One verification run per (k_max, method in {carv, hybr})."""
    if not k_values:
        raise ValueError("k_values must be nonempty")
    for m in methods:
        if m not in ("carv", "hybr"):
            raise ValueError(f"sweep_kmax supports carv/hybr, got {m!r}")
    records = []
    for k in k_values:
        for method in methods:
            try:
                records.append(_record(k, method, _run_method(scenario.with_k_max(k), method)))
            except Exception as exc:  # noqa: BLE001 - sweep continues past failures
                log.warning("sweep point k=%d method=%s failed: %s", k, method, exc)
                records.append(SweepRecord(k, method, False, 0.0, 0, 0, error=str(exc)))
    return records


def _recheck_fixed_boxes(
    result: VerificationResult, constraints: ConstraintSet
) -> bool:
    """Verdict of an existing run against (inflated) constraints.  Uses
    per-cell boxes for partition results, hull boxes otherwise."""
    if result.timed_out:
        return False
    if result.partition_boxes is not None:
        return all(
            eval_box(constraints, b)
            for boxes in result.partition_boxes
            for b in boxes
        )
    return all(eval_box(constraints, r.box) for r in result.rsoas)


def sweep_radius(
    scenario: Scenario,
    methods: list[str],
    deltas: list[float],
    grid: PartitionGrid | None = None,
    budget_secs: float | None = None,
) -> list[SweepRecord]:
    """Inflate every disk radius by each delta and record verdicts per method.

    Methods whose RSOAs do not depend on the constraints (part, symb, hybr)
    are run once and re-checked against the inflated disks; carv re-runs
    fully per delta since its refinement is constraint-driven.
    """
    records = []
    cached: dict[str, VerificationResult] = {}
    for method in methods:
        if method == "carv":
            continue
        try:
            cached[method] = _run_method(
                scenario, method, grid=grid, budget_secs=budget_secs
            )
        except Exception as exc:  # noqa: BLE001
            log.warning("base run for method=%s failed: %s", method, exc)
            for d in deltas:
                records.append(SweepRecord(d, method, False, 0.0, 0, 0, error=str(exc)))
    for d in deltas:
        inflated = scenario.constraints.inflate(d)
        for method in methods:
            if method == "carv":
                try:
                    res = carv(scenario.with_constraints(inflated))
                    records.append(_record(d, method, res))
                except Exception as exc:  # noqa: BLE001
                    log.warning("carv sweep point delta=%g failed: %s", d, exc)
                    records.append(
                        SweepRecord(d, method, False, 0.0, 0, 0, error=str(exc))
                    )
            elif method in cached:
                base = cached[method]
                t0 = time.monotonic()
                verified = _recheck_fixed_boxes(base, inflated)
                records.append(
                    SweepRecord(
                        parameter=d,
                        method=method,
                        verified=verified,
                        seconds=base.stats.total_seconds + (time.monotonic() - t0),
                        concrete_calls=base.stats.concrete_calls,
                        symbolic_calls=base.stats.symbolic_total,
                    )
                )
    records.sort(key=lambda r: (r.parameter, r.method))
    return records
