"""Backward linear bound propagation over computation graphs.

Given a graph G and an input box, produces affine bounds
``psi @ z + alpha <= G(z) <= phi @ z + beta`` valid for every z in the box,
by propagating coefficient matrices backward through the graph and replacing
each nonlinear node with a sound linear envelope over its pre-activation
interval.  Pre-activation intervals are themselves obtained by running the
backward pass on the sub-graph ending at each nonlinear node, in topological
order.

Concretization turns the affine bounds plus the input box into an output box
(exact for affine-only graphs).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compgraph import CompGraph
from .numerics import Box, Interval, box_center_radius

__all__ = [
    "BoundsDivergedError",
    "NodeRelaxation",
    "LinearBounds",
    "relax_relu",
    "relax_trig",
    "backward_crown",
    "concretize",
]

_TWO_PI = 2.0 * np.pi


class BoundsDivergedError(ArithmeticError):
    """Raised when intermediate bounds become non-finite."""


@dataclass(frozen=True)
class NodeRelaxation:
    """Scalar linear envelope: lower/upper lines bounding sigma on [l, u]."""

    lower_slope: float
    lower_intercept: float
    upper_slope: float
    upper_intercept: float


@dataclass(frozen=True)
class LinearBounds:
    """Affine output bounds w.r.t. the graph input.

    ``pre_activations`` maps nonlinear node index -> (lower, upper) arrays of
    the pre-activation bounds used to build its relaxation.
    """

    psi: np.ndarray
    alpha: np.ndarray
    phi: np.ndarray
    beta: np.ndarray
    pre_activations: dict[int, tuple[np.ndarray, np.ndarray]] | None = None


def _relax_relu_arrays(l: np.ndarray, u: np.ndarray):
    """Vectorized CROWN ReLU envelope over [l, u] per element.

    Upper line is the chord through (l, 0) and (u, u) on unstable neurons;
    lower line uses the adaptive slope rule (1 if u >= -l else 0).
    """
    l = np.asarray(l, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    active = l >= 0.0
    inactive = u <= 0.0
    unstable = ~(active | inactive)

    us = np.where(active, 1.0, 0.0)
    ui = np.zeros_like(l)
    ls = np.where(active, 1.0, 0.0)
    li = np.zeros_like(l)

    if np.any(unstable):
        lu = np.where(unstable, l, -1.0)
        uu = np.where(unstable, u, 1.0)
        slope = uu / (uu - lu)
        us = np.where(unstable, slope, us)
        ui = np.where(unstable, -lu * slope, ui)
        ls = np.where(unstable, np.where(uu >= -lu, 1.0, 0.0), ls)
    return ls, li, us, ui


def relax_relu(pre: Interval) -> NodeRelaxation:
    """Sound linear envelope of max(0, z) on the given interval."""
    ls, li, us, ui = _relax_relu_arrays(np.array([pre.lo]), np.array([pre.hi]))
    return NodeRelaxation(float(ls[0]), float(li[0]), float(us[0]), float(ui[0]))


def _trig_fn(kind: str):
    if kind == "sin":
        return np.sin, np.cos, lambda z: -np.sin(z)
    if kind == "cos":
        return np.cos, lambda z: -np.sin(z), lambda z: -np.cos(z)
    raise ValueError(f"unknown trig kind {kind!r}")


def _trig_range(kind: str, l: float, u: float) -> tuple[float, float]:
    """Exact min/max of sin or cos over [l, u] via endpoint/critical points."""
    f, _, _ = _trig_fn(kind)
    candidates = [f(l), f(u)]
    # critical points: z = pi/2 + k*pi (sin), z = k*pi (cos)
    offset = np.pi / 2 if kind == "sin" else 0.0
    k0 = int(np.ceil((l - offset) / np.pi))
    k1 = int(np.floor((u - offset) / np.pi))
    for k in range(k0, k1 + 1):
        candidates.append(f(offset + k * np.pi))
    return float(min(candidates)), float(max(candidates))


def _trig_curvature_constant(kind: str, l: float, u: float) -> bool:
    """True iff the second derivative keeps one sign on [l, u]."""
    # sign(f'') is constant iff [l, u] lies within one half-period of the
    # relevant phase: sin'' = -sin changes sign at multiples of pi;
    # cos'' = -cos at pi/2 + multiples of pi.
    offset = 0.0 if kind == "sin" else np.pi / 2
    k = np.floor((l - offset) / np.pi)
    return u - offset <= (k + 1) * np.pi


def _relax_trig_scalar(kind: str, l: float, u: float) -> NodeRelaxation:
    f, df, d2f = _trig_fn(kind)
    if l == u:
        c = float(f(l))
        return NodeRelaxation(0.0, c, 0.0, c)
    if u - l >= _TWO_PI:
        return NodeRelaxation(0.0, -1.0, 0.0, 1.0)
    if _trig_curvature_constant(kind, l, u):
        m = 0.5 * (l + u)
        chord_slope = (float(f(u)) - float(f(l))) / (u - l)
        chord_icpt = float(f(l)) - chord_slope * l
        tan_slope = float(df(m))
        tan_icpt = float(f(m)) - tan_slope * m
        if d2f(m) <= 0.0:  # concave: chord below, tangent above
            return NodeRelaxation(chord_slope, chord_icpt, tan_slope, tan_icpt)
        return NodeRelaxation(tan_slope, tan_icpt, chord_slope, chord_icpt)
    lo, hi = _trig_range(kind, l, u)
    return NodeRelaxation(0.0, lo, 0.0, hi)


def relax_trig(kind: str, pre: Interval) -> NodeRelaxation:
    """Sound linear envelope of sin/cos on the given interval."""
    return _relax_trig_scalar(kind, pre.lo, pre.hi)


def _relax_trig_arrays(kind: str, l: np.ndarray, u: np.ndarray):
    ls = np.empty_like(l)
    li = np.empty_like(l)
    us = np.empty_like(l)
    ui = np.empty_like(l)
    for i in range(l.shape[0]):
        r = _relax_trig_scalar(kind, float(l[i]), float(u[i]))
        ls[i], li[i] = r.lower_slope, r.lower_intercept
        us[i], ui[i] = r.upper_slope, r.upper_intercept
    return ls, li, us, ui


def _ancestors(graph: CompGraph, target: int) -> set[int]:
    seen = {target}
    stack = [target]
    while stack:
        for p in graph.nodes[stack.pop()].parents:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def _backward_pass(graph: CompGraph, target: int, relax: dict):
    """Propagate coefficients from ``target`` back to the input node.

    Returns (psi, alpha, phi, beta) such that
    psi @ z + alpha <= node_target(z) <= phi @ z + beta on the input box the
    relaxations were computed for.
    """
    nodes = graph.nodes
    d_out = nodes[target].dim
    need = _ancestors(graph, target)

    lam_l: dict[int, np.ndarray] = {target: np.eye(d_out)}
    lam_u: dict[int, np.ndarray] = {target: np.eye(d_out)}
    alpha = np.zeros(d_out)
    beta = np.zeros(d_out)
    psi = np.zeros((d_out, graph.input_dim))
    phi = np.zeros((d_out, graph.input_dim))

    def _acc(store, key, value):
        if key in store:
            store[key] = store[key] + value
        else:
            store[key] = value

    for v in sorted(need, reverse=True):
        if v not in lam_l:
            continue
        al = lam_l.pop(v)
        au = lam_u.pop(v)
        node = nodes[v]
        if node.kind == "input":
            psi = psi + al
            phi = phi + au
        elif node.kind == "affine":
            alpha = alpha + al @ node.bias
            beta = beta + au @ node.bias
            _acc(lam_l, node.parents[0], al @ node.weight)
            _acc(lam_u, node.parents[0], au @ node.weight)
        elif node.kind == "sum":
            for p in node.parents:
                _acc(lam_l, p, al)
                _acc(lam_u, p, au)
        elif node.kind == "scale":
            _acc(lam_l, node.parents[0], node.factor * al)
            _acc(lam_u, node.parents[0], node.factor * au)
        else:  # relu / sin / cos
            ls, li, us, ui = relax[v]
            pos_l = al >= 0.0
            pos_u = au >= 0.0
            alpha = alpha + np.sum(al * np.where(pos_l, li, ui), axis=1)
            beta = beta + np.sum(au * np.where(pos_u, ui, li), axis=1)
            _acc(lam_l, node.parents[0], al * np.where(pos_l, ls, us))
            _acc(lam_u, node.parents[0], au * np.where(pos_u, us, ls))
    return psi, alpha, phi, beta


def _concretize_arrays(
    psi: np.ndarray,
    alpha: np.ndarray,
    phi: np.ndarray,
    beta: np.ndarray,
    input_box: Box,
) -> tuple[np.ndarray, np.ndarray]:
    c, r = box_center_radius(input_box)
    # overflow here is reported as BoundsDivergedError by the callers
    with np.errstate(over="ignore", invalid="ignore"):
        lower = psi @ c - np.abs(psi) @ r + alpha
        upper = phi @ c + np.abs(phi) @ r + beta
    return lower, upper


def backward_crown(graph: CompGraph, input_box: Box) -> LinearBounds:
    """Affine bounds on the graph output over ``input_box``.

    Pre-activation intervals for every nonlinear node are computed first by
    bounding the sub-graph ending at that node (full backward passes, in
    topological order) and are cached on the result.
    """
    if input_box.dim != graph.input_dim:
        raise ValueError(
            f"input box dim {input_box.dim} != graph input dim {graph.input_dim}"
        )
    relax: dict[int, tuple] = {}
    pre_acts: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for v, node in enumerate(graph.nodes):
        if node.kind not in ("relu", "sin", "cos"):
            continue
        p = node.parents[0]
        psi, alpha, phi, beta = _backward_pass(graph, p, relax)
        lo, hi = _concretize_arrays(psi, alpha, phi, beta, input_box)
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise BoundsDivergedError(f"bounds diverged at node {v}")
        pre_acts[v] = (lo, hi)
        if node.kind == "relu":
            relax[v] = _relax_relu_arrays(lo, hi)
        else:
            relax[v] = _relax_trig_arrays(node.kind, lo, hi)

    psi, alpha, phi, beta = _backward_pass(graph, graph.output, relax)
    if not all(
        np.all(np.isfinite(a)) for a in (psi, alpha, phi, beta)
    ):
        raise BoundsDivergedError("bounds diverged at the output node")
    return LinearBounds(psi, alpha, phi, beta, pre_acts)


def concretize(lb: LinearBounds, input_box: Box) -> Box:
    """Output box implied by affine bounds over an input box."""
    lower, upper = _concretize_arrays(lb.psi, lb.alpha, lb.phi, lb.beta, input_box)
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise BoundsDivergedError("bounds diverged during concretization")
    if np.any(lower > upper):
        raise ArithmeticError("inconsistent bounds: lower > upper")
    return Box(lower, upper)
