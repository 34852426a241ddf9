"""Verification problem description shared by all methods."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .compgraph import DynamicsSpec, Network
from .numerics import Box
from .reach import ConstraintSet

__all__ = ["Scenario"]


@dataclass(frozen=True)
class Scenario:
    """Dynamics + policy + initial set + constraints + horizon settings."""

    dyn: DynamicsSpec
    policy: Network
    x0: Box
    constraints: ConstraintSet
    t_f: int
    k_max: int
    mc_n: int = 1000
    mc_seed: int = 0

    def __post_init__(self):
        if self.t_f < 1:
            raise ValueError("t_f must be >= 1")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if self.x0.dim != self.dyn.state_dim:
            raise ValueError("x0 dimension does not match the dynamics")
        if self.policy.input_dim != self.dyn.state_dim:
            raise ValueError("policy input dimension does not match the dynamics")

    def with_k_max(self, k_max: int) -> "Scenario":
        return replace(self, k_max=k_max)

    def with_constraints(self, constraints: ConstraintSet) -> "Scenario":
        return replace(self, constraints=constraints)
