"""Reachable-set over-approximations and safety constraint evaluation.

An ``Rsoa`` is a box tagged with its time index and provenance: the initial
set, a concrete (one-step) bound from the previous set, or a symbolic
(multi-step) bound from an earlier anchor set.  ``ConstraintSet`` evaluates
points and boxes against halfspace and disk-avoidance constraints; a false
box answer means "cannot verify", not "unsafe".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .compgraph import CompGraph, DynamicsSpec, Network, compose_closed_loop
from .crown import backward_crown, concretize
from .numerics import Box

__all__ = [
    "Rsoa",
    "Halfspace",
    "DiskAvoid",
    "ConstraintSet",
    "GraphCache",
    "is_symbolic",
    "concrete_reachability",
    "symbolic_reachability",
    "eval_point",
    "eval_box",
]

KINDS = ("initial", "concrete", "symbolic")


@dataclass(frozen=True)
class Rsoa:
    """A reachable-set over-approximation at time ``t``.

    ``anchor_t`` is the time of the set this box was bounded from; for the
    initial set it is 0.
    """

    box: Box
    t: int
    kind: str
    anchor_t: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown rsoa kind {self.kind!r}")
        if (self.kind == "initial") != (self.t == 0):
            raise ValueError("kind=initial exactly when t=0")
        if self.kind != "initial":
            if not self.anchor_t < self.t:
                raise ValueError("anchor_t must precede t")
            if self.kind == "concrete" and self.anchor_t != self.t - 1:
                raise ValueError("concrete rsoa must anchor at t-1")


def is_symbolic(r: Rsoa) -> bool:
    """True for sets usable as symbolic anchors (initial set included:
    it is exact, hence the strongest possible anchor)."""
    return r.kind in ("initial", "symbolic")


@dataclass(frozen=True)
class Halfspace:
    """Constraint normal . x >= offset."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.array(self.normal, dtype=np.float64)
        if n.ndim != 1 or not np.any(n != 0.0):
            raise ValueError("halfspace normal must be a nonzero vector")
        n.flags.writeable = False
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))


@dataclass(frozen=True)
class DiskAvoid:
    """Keep-out disk in the plane spanned by two state coordinates."""

    center: np.ndarray
    radius: float
    coords: tuple[int, int] = (0, 1)

    def __post_init__(self):
        c = np.array(self.center, dtype=np.float64)
        if c.shape != (2,):
            raise ValueError("disk center must be a 2-vector")
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")
        c.flags.writeable = False
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "coords", (int(self.coords[0]), int(self.coords[1])))


@dataclass(frozen=True)
class ConstraintSet:
    """Conjunction of halfspace and disk-avoidance items (empty = always safe)."""

    items: tuple = ()

    def __post_init__(self):
        for item in self.items:
            if not isinstance(item, (Halfspace, DiskAvoid)):
                raise ValueError(f"unknown constraint item {type(item).__name__}")
        object.__setattr__(self, "items", tuple(self.items))

    def inflate(self, delta_r: float) -> "ConstraintSet":
        """Grow every disk radius by delta_r; halfspaces are unchanged."""
        items = tuple(
            DiskAvoid(i.center, i.radius + delta_r, i.coords)
            if isinstance(i, DiskAvoid)
            else i
            for i in self.items
        )
        return ConstraintSet(items)


def eval_point(c: ConstraintSet, x: np.ndarray) -> bool:
    """True iff every constraint item is satisfied at x."""
    x = np.asarray(x, dtype=np.float64)
    for item in c.items:
        if isinstance(item, Halfspace):
            if float(item.normal @ x) < item.offset:
                return False
        else:
            p = x[list(item.coords)] - item.center
            if float(p @ p) < item.radius**2:
                return False
    return True


def eval_box(c: ConstraintSet, b: Box) -> bool:
    """True iff the whole box satisfies every item (exact, not conservative).

    A false answer means the over-approximation cannot be verified safe; the
    underlying true set may still be safe.
    """
    for item in c.items:
        if isinstance(item, Halfspace):
            # corner formula: min over the box of normal . x
            n = item.normal
            worst = float(np.sum(np.where(n >= 0, n * b.lower, n * b.upper)))
            if worst < item.offset:
                return False
        else:
            i, j = item.coords
            closest = np.array(
                [
                    min(max(item.center[0], b.lower[i]), b.upper[i]),
                    min(max(item.center[1], b.lower[j]), b.upper[j]),
                ]
            )
            d = closest - item.center
            if float(d @ d) < item.radius**2:
                return False
    return True


class GraphCache:
    """Per-run cache of k-step closed-loop graphs for one (dyn, policy) pair."""

    def __init__(self, dyn: DynamicsSpec, policy: Network):
        self.dyn = dyn
        self.policy = policy
        self._graphs: dict[int, CompGraph] = {}

    def graph(self, k: int) -> CompGraph:
        if k not in self._graphs:
            self._graphs[k] = compose_closed_loop(self.dyn, self.policy, k)
        return self._graphs[k]


def _bound_step(cache: GraphCache, box: Box, k: int) -> Box:
    graph = cache.graph(k)
    return concretize(backward_crown(graph, box), box)


def concrete_reachability(
    prev: Rsoa,
    dyn: DynamicsSpec,
    policy: Network,
    cache: GraphCache | None = None,
) -> Rsoa:
    """One-step RSOA from the previous set."""
    cache = cache or GraphCache(dyn, policy)
    box = _bound_step(cache, prev.box, 1)
    return Rsoa(box, prev.t + 1, "concrete", anchor_t=prev.t)


def symbolic_reachability(
    anchor: Rsoa,
    dyn: DynamicsSpec,
    policy: Network,
    k: int,
    cache: GraphCache | None = None,
) -> Rsoa:
    """k-step RSOA in one pass over the k-step composed graph."""
    if k < 1:
        raise ValueError("symbolic horizon must be >= 1")
    cache = cache or GraphCache(dyn, policy)
    box = _bound_step(cache, anchor.box, k)
    return Rsoa(box, anchor.t + k, "symbolic", anchor_t=anchor.t)
