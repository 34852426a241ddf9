"""JSON load/save for network weights and scenario definitions.

Formats are language-neutral so controllers can be produced elsewhere:

weights:  {"format_version": 1, "input_dim": N,
           "layers": [{"weights": [[...]], "bias": [...],
                       "activation": "relu"|"linear"}, ...]}

scenario: {"dynamics": {"kind": "double_integrator"|"unicycle",
                        "dt": f, "v": f?},
           "policy": "path relative to the scenario file",
           "x0": {"lower": [...], "upper": [...]},
           "constraints": [{"type": "halfspace", "normal": [...], "offset": f}
                          |{"type": "disk_avoid", "center": [f, f],
                            "radius": f, "coords": [i, j]}],
           "t_f": n, "k_max": n, "mc": {"n": n, "seed": n}?}

Floats are serialized with shortest round-trip decimals, so save -> load is
bit-exact.  Loading validates strictly and never clamps or reorders.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .compgraph import DynamicsSpec, Network
from .numerics import Box
from .reach import ConstraintSet, DiskAvoid, Halfspace
from .scenario import Scenario

__all__ = [
    "SchemaError",
    "load_network",
    "save_network",
    "load_scenario",
    "save_scenario",
]

FORMAT_VERSION = 1


class SchemaError(ValueError):
    """A file exists and parses but does not match the documented schema."""


def _require(data: dict, key: str, where: str):
    if key not in data:
        raise SchemaError(f"{where}: missing field {key!r}")
    return data[key]


def _finite_array(values, where: str) -> np.ndarray:
    try:
        arr = np.array(values, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: not a numeric array") from exc
    if not np.all(np.isfinite(arr)):
        raise SchemaError(f"{where}: contains NaN/Inf")
    return arr


def _read_json(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: top level must be an object")
    return data


def load_network(path) -> Network:
    """Load and validate a weights file."""
    data = _read_json(path)
    version = _require(data, "format_version", str(path))
    if version != FORMAT_VERSION:
        raise SchemaError(f"{path}: unsupported format_version {version!r}")
    input_dim = _require(data, "input_dim", str(path))
    if not isinstance(input_dim, int) or input_dim < 1:
        raise SchemaError(f"{path}: input_dim must be a positive integer")
    raw_layers = _require(data, "layers", str(path))
    if not isinstance(raw_layers, list) or not raw_layers:
        raise SchemaError(f"{path}: layers must be a nonempty list")

    layers = []
    prev = input_dim
    for i, layer in enumerate(raw_layers, start=1):
        w = _finite_array(_require(layer, "weights", f"layer {i}"), f"layer {i} weights")
        b = _finite_array(_require(layer, "bias", f"layer {i}"), f"layer {i} bias")
        act = _require(layer, "activation", f"layer {i}")
        if w.ndim != 2:
            raise SchemaError(f"layer {i}: weights must be a 2-D array")
        if w.shape[1] != prev:
            raise SchemaError(f"layer {i} expects in={prev}, got {w.shape[1]}")
        if b.shape != (w.shape[0],):
            raise SchemaError(f"layer {i}: bias length {b.shape[0]} != rows {w.shape[0]}")
        if act not in ("relu", "linear"):
            raise SchemaError(f"layer {i}: unknown activation {act!r}")
        layers.append((w, b, act))
        prev = w.shape[0]
    if layers[-1][2] != "linear":
        raise SchemaError(f"{path}: final layer activation must be 'linear'")
    return Network(input_dim=input_dim, layers=tuple(layers))


def save_network(net: Network, path) -> None:
    data = {
        "format_version": FORMAT_VERSION,
        "input_dim": net.input_dim,
        "layers": [
            {"weights": w.tolist(), "bias": b.tolist(), "activation": act}
            for w, b, act in net.layers
        ],
    }
    _atomic_write_json(path, data)


def _parse_constraints(raw, where: str) -> ConstraintSet:
    if not isinstance(raw, list):
        raise SchemaError(f"{where}: constraints must be a list")
    items = []
    for i, entry in enumerate(raw):
        tag = _require(entry, "type", f"constraint {i}")
        if tag == "halfspace":
            items.append(
                Halfspace(
                    _finite_array(_require(entry, "normal", f"constraint {i}"), "normal"),
                    float(_require(entry, "offset", f"constraint {i}")),
                )
            )
        elif tag == "disk_avoid":
            coords = entry.get("coords", [0, 1])
            items.append(
                DiskAvoid(
                    _finite_array(_require(entry, "center", f"constraint {i}"), "center"),
                    float(_require(entry, "radius", f"constraint {i}")),
                    (int(coords[0]), int(coords[1])),
                )
            )
        else:
            raise SchemaError(f"constraint {i}: unknown type {tag!r}")
    return ConstraintSet(tuple(items))


def load_scenario(path) -> Scenario:
    """Load a scenario file; the policy path is resolved relative to it."""
    path = Path(path)
    data = _read_json(path)

    dyn_raw = _require(data, "dynamics", str(path))
    kind = _require(dyn_raw, "kind", "dynamics")
    dt = float(_require(dyn_raw, "dt", "dynamics"))
    if dt <= 0:
        raise SchemaError("dynamics: dt must be positive")
    try:
        dyn = DynamicsSpec(kind=kind, dt=dt, v=float(dyn_raw.get("v", 1.0)))
    except ValueError as exc:
        raise SchemaError(f"dynamics: {exc}") from exc

    policy_path = Path(_require(data, "policy", str(path)))
    if not policy_path.is_absolute():
        policy_path = path.parent / policy_path
    policy = load_network(policy_path)

    x0_raw = _require(data, "x0", str(path))
    try:
        x0 = Box(
            _finite_array(_require(x0_raw, "lower", "x0"), "x0 lower"),
            _finite_array(_require(x0_raw, "upper", "x0"), "x0 upper"),
        )
    except ValueError as exc:
        raise SchemaError(f"x0: {exc}") from exc

    constraints = _parse_constraints(_require(data, "constraints", str(path)), str(path))
    mc = data.get("mc", {})
    try:
        return Scenario(
            dyn=dyn,
            policy=policy,
            x0=x0,
            constraints=constraints,
            t_f=int(_require(data, "t_f", str(path))),
            k_max=int(_require(data, "k_max", str(path))),
            mc_n=int(mc.get("n", 1000)),
            mc_seed=int(mc.get("seed", 0)),
        )
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def constraints_to_json(c: ConstraintSet) -> list[dict]:
    out = []
    for item in c.items:
        if isinstance(item, Halfspace):
            out.append(
                {"type": "halfspace", "normal": item.normal.tolist(), "offset": item.offset}
            )
        else:
            out.append(
                {
                    "type": "disk_avoid",
                    "center": item.center.tolist(),
                    "radius": item.radius,
                    "coords": list(item.coords),
                }
            )
    return out


def save_scenario(scenario: Scenario, path, policy_path: str) -> None:
    """Write a scenario file referencing an already saved policy file."""
    data = {
        "dynamics": {"kind": scenario.dyn.kind, "dt": scenario.dyn.dt},
        "policy": policy_path,
        "x0": {
            "lower": scenario.x0.lower.tolist(),
            "upper": scenario.x0.upper.tolist(),
        },
        "constraints": constraints_to_json(scenario.constraints),
        "t_f": scenario.t_f,
        "k_max": scenario.k_max,
        "mc": {"n": scenario.mc_n, "seed": scenario.mc_seed},
    }
    if scenario.dyn.kind == "unicycle":
        data["dynamics"]["v"] = scenario.dyn.v
    _atomic_write_json(path, data)


def _atomic_write_json(path, data) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)
