"""Computation graphs for policies and closed-loop dynamics.

A ``CompGraph`` is a topologically ordered DAG built from a small set of
primitives (affine, relu, sin, cos, sum, scale) with a single input node.
The closed-loop step of a scenario and its k-step self-compositions are
represented as graphs so the bound engine can traverse them uniformly;
:func:`evaluate` gives the exact forward semantics the bounds must contain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Network",
    "DynamicsSpec",
    "Node",
    "CompGraph",
    "step_exact",
    "step_batch",
    "policy_forward",
    "compose_closed_loop",
    "evaluate",
    "simulate",
    "simulate_batch",
]

_ACTIVATIONS = ("relu", "linear")


@dataclass(frozen=True)
class Network:
    """Fully connected network: ordered (weights, bias, activation) layers.

    Weights are (out, in) matrices; consecutive layer dimensions must chain
    and the final activation must be linear.
    """

    input_dim: int
    layers: tuple[tuple[np.ndarray, np.ndarray, str], ...]

    def __post_init__(self):
        if self.input_dim < 1:
            raise ValueError("input_dim must be positive")
        if not self.layers:
            raise ValueError("network needs at least one layer")
        frozen = []
        prev = self.input_dim
        for i, (w, b, act) in enumerate(self.layers):
            w = np.array(w, dtype=np.float64)
            b = np.array(b, dtype=np.float64)
            if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
                raise ValueError(f"layer {i + 1} has inconsistent weight/bias shapes")
            if w.shape[1] != prev:
                raise ValueError(
                    f"layer {i + 1} expects in={prev}, got {w.shape[1]}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {i + 1} has non-finite parameters")
            if act not in _ACTIVATIONS:
                raise ValueError(f"unknown activation {act!r}")
            w.flags.writeable = False
            b.flags.writeable = False
            frozen.append((w, b, act))
            prev = w.shape[0]
        if frozen[-1][2] != "linear":
            raise ValueError("final layer activation must be linear")
        object.__setattr__(self, "layers", tuple(frozen))

    @property
    def output_dim(self) -> int:
        return self.layers[-1][0].shape[0]


@dataclass(frozen=True)
class DynamicsSpec:
    """Discrete-time dynamics family: double integrator or unicycle."""

    kind: str  # "double_integrator" | "unicycle"
    dt: float
    v: float = 1.0  # constant speed, unicycle only

    def __post_init__(self):
        if self.kind not in ("double_integrator", "unicycle"):
            raise ValueError(f"unknown dynamics kind {self.kind!r}")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError("dt must be positive and finite")
        if not np.isfinite(self.v):
            raise ValueError("v must be finite")

    @property
    def state_dim(self) -> int:
        return 2 if self.kind == "double_integrator" else 3

    @property
    def input_dim(self) -> int:
        return 1

    def linear_part(self) -> tuple[np.ndarray, np.ndarray]:
        """(A, B) for x' = A x + B u.  Double integrator only."""
        if self.kind != "double_integrator":
            raise ValueError("linear_part is only defined for the double integrator")
        dt = self.dt
        a = np.array([[1.0, dt], [0.0, 1.0]])
        b = np.array([[0.5 * dt * dt], [dt]])
        return a, b


@dataclass(frozen=True)
class Node:
    """One graph node.  ``parents`` index earlier nodes (topological order)."""

    kind: str  # input | affine | relu | sin | cos | sum | scale
    parents: tuple[int, ...]
    dim: int
    weight: np.ndarray | None = None  # affine only, (dim, parent_dim)
    bias: np.ndarray | None = None  # affine only, (dim,)
    factor: float = 1.0  # scale only
    tag: str = ""  # provenance label, e.g. "policy:2"


@dataclass(frozen=True)
class CompGraph:
    nodes: tuple[Node, ...]
    output: int
    input_dim: int
    output_dim: int

    def __post_init__(self):
        if not self.nodes or self.nodes[0].kind != "input":
            raise ValueError("graph must start with the input node")
        for i, node in enumerate(self.nodes):
            if node.kind == "input" and i != 0:
                raise ValueError("graph must have exactly one input node")
            for p in node.parents:
                if not 0 <= p < i:
                    raise ValueError(f"node {i} has non-topological parent {p}")

    def policy_copies(self) -> int:
        """Number of distinct policy sub-graph copies embedded in the graph."""
        copies = {
            n.tag.split(":")[1] for n in self.nodes if n.tag.startswith("policy:")
        }
        return len(copies)


class GraphBuilder:
    """Incremental construction of a CompGraph."""

    def __init__(self, input_dim: int):
        self.nodes: list[Node] = [Node("input", (), input_dim)]
        self.input_dim = input_dim

    def _add(self, node: Node) -> int:
        self.nodes.append(node)
        return len(self.nodes) - 1

    def affine(self, parent: int, w: np.ndarray, b: np.ndarray, tag: str = "") -> int:
        w = np.asarray(w, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if w.shape != (b.shape[0], self.nodes[parent].dim):
            raise ValueError("affine node shape mismatch")
        return self._add(Node("affine", (parent,), w.shape[0], w, b, tag=tag))

    def relu(self, parent: int, tag: str = "") -> int:
        return self._add(Node("relu", (parent,), self.nodes[parent].dim, tag=tag))

    def trig(self, kind: str, parent: int, tag: str = "") -> int:
        if kind not in ("sin", "cos"):
            raise ValueError(f"unknown trig kind {kind!r}")
        return self._add(Node(kind, (parent,), self.nodes[parent].dim, tag=tag))

    def sum(self, parents: list[int], tag: str = "") -> int:
        dims = {self.nodes[p].dim for p in parents}
        if len(dims) != 1:
            raise ValueError("sum node parents must share a dimension")
        return self._add(Node("sum", tuple(parents), dims.pop(), tag=tag))

    def scale(self, parent: int, factor: float, tag: str = "") -> int:
        return self._add(
            Node("scale", (parent,), self.nodes[parent].dim, factor=float(factor), tag=tag)
        )

    def finish(self, output: int) -> CompGraph:
        return CompGraph(
            tuple(self.nodes), output, self.input_dim, self.nodes[output].dim
        )


def policy_forward(policy: Network, x: np.ndarray) -> np.ndarray:
    """Exact forward pass; x may be a single state (n,) or a batch (N, n)."""
    h = np.asarray(x, dtype=np.float64)
    for w, b, act in policy.layers:
        h = h @ w.T + b
        if act == "relu":
            h = np.maximum(h, 0.0)
    return h


def step_exact(dyn: DynamicsSpec, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """One exact step of the dynamics."""
    x = np.asarray(x, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if x.shape != (dyn.state_dim,) or u.shape != (dyn.input_dim,):
        raise ValueError(
            f"state/input dims {x.shape}/{u.shape} do not match {dyn.kind}"
        )
    return step_batch(dyn, x[None, :], u[None, :])[0]


def step_batch(dyn: DynamicsSpec, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Vectorized dynamics step over a batch of states (N, n) and inputs (N, m)."""
    if dyn.kind == "double_integrator":
        a, b = dyn.linear_part()
        return x @ a.T + u @ b.T
    psi = x[:, 2]
    delta = np.stack(
        [dyn.v * np.cos(psi), dyn.v * np.sin(psi), u[:, 0]], axis=1
    )
    return x + dyn.dt * delta


def simulate(
    dyn: DynamicsSpec, policy: Network, x0: np.ndarray, t: int
) -> list[np.ndarray]:
    """Closed-loop trajectory [x0, x1, ..., xt]."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    traj = [np.asarray(x0, dtype=np.float64)]
    for _ in range(t):
        x = traj[-1]
        traj.append(step_exact(dyn, x, policy_forward(policy, x)))
    return traj


def simulate_batch(
    dyn: DynamicsSpec, policy: Network, x0: np.ndarray, t: int
) -> np.ndarray:
    """Batched trajectories, shape (t+1, N, n)."""
    states = [np.asarray(x0, dtype=np.float64)]
    for _ in range(t):
        x = states[-1]
        states.append(step_batch(dyn, x, policy_forward(policy, x)))
    return np.stack(states, axis=0)


def _append_policy(builder: GraphBuilder, policy: Network, state: int, copy: int) -> int:
    h = state
    for li, (w, b, act) in enumerate(policy.layers):
        h = builder.affine(h, w, b, tag=f"policy:{copy}:affine{li}")
        if act == "relu":
            h = builder.relu(h, tag=f"policy:{copy}:relu{li}")
    return h


def _append_step(builder: GraphBuilder, dyn: DynamicsSpec, state: int, u: int) -> int:
    if dyn.kind == "double_integrator":
        a, b = dyn.linear_part()
        ax = builder.affine(state, a, np.zeros(2))
        bu = builder.affine(u, b, np.zeros(2))
        return builder.sum([ax, bu])
    dt, v = dyn.dt, dyn.v
    psi = builder.affine(state, np.array([[0.0, 0.0, 1.0]]), np.zeros(1))
    c = builder.trig("cos", psi)
    s = builder.trig("sin", psi)
    keep = builder.affine(state, np.eye(3), np.zeros(3))
    cx = builder.affine(c, np.array([[v * dt], [0.0], [0.0]]), np.zeros(3))
    sy = builder.affine(s, np.array([[0.0], [v * dt], [0.0]]), np.zeros(3))
    uw = builder.affine(u, np.array([[0.0], [0.0], [dt]]), np.zeros(3))
    return builder.sum([keep, cx, sy, uw])


def compose_closed_loop(dyn: DynamicsSpec, policy: Network, k: int) -> CompGraph:
    """Graph computing k repeated closed-loop steps x -> f_cl^k(x)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if policy.input_dim != dyn.state_dim:
        raise ValueError(
            f"policy input dim {policy.input_dim} != state dim {dyn.state_dim}"
        )
    if policy.output_dim != dyn.input_dim:
        raise ValueError(
            f"policy output dim {policy.output_dim} != control dim {dyn.input_dim}"
        )
    builder = GraphBuilder(dyn.state_dim)
    state = 0
    for step in range(k):
        u = _append_policy(builder, policy, state, step)
        state = _append_step(builder, dyn, state, u)
    return builder.finish(state)


def evaluate(graph: CompGraph, x: np.ndarray) -> np.ndarray:
    """Exact forward pass through the graph."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (graph.input_dim,):
        raise ValueError(
            f"input dim {x.shape} does not match graph input {graph.input_dim}"
        )
    values: list[np.ndarray] = []
    for node in graph.nodes:
        if node.kind == "input":
            values.append(x)
        elif node.kind == "affine":
            values.append(node.weight @ values[node.parents[0]] + node.bias)
        elif node.kind == "relu":
            values.append(np.maximum(values[node.parents[0]], 0.0))
        elif node.kind == "sin":
            values.append(np.sin(values[node.parents[0]]))
        elif node.kind == "cos":
            values.append(np.cos(values[node.parents[0]]))
        elif node.kind == "sum":
            values.append(sum(values[p] for p in node.parents))
        elif node.kind == "scale":
            values.append(node.factor * values[node.parents[0]])
        else:  # pragma: no cover
            raise ValueError(f"unknown node kind {node.kind!r}")
    return values[graph.output]
