"""Closed-loop simulation primitives shared by the expert and the reports.

The step semantics mirror the verifier's scenario format: a double
integrator ``x+ = A x + B u`` with dt-parameterized matrices, and a
fixed-speed unicycle ``x+ = x + dt * [v cos(psi), v sin(psi), omega]``.
"""

from __future__ import annotations

import numpy as np

__all__ = ["di_matrices", "step", "rollout", "policy_forward"]


def di_matrices(dt: float) -> tuple[np.ndarray, np.ndarray]:
    a = np.array([[1.0, dt], [0.0, 1.0]])
    b = np.array([[dt * dt / 2.0], [dt]])
    return a, b


def step(kind: str, x: np.ndarray, u: float, dt: float, v: float = 1.0) -> np.ndarray:
    if kind == "di":
        a, b = di_matrices(dt)
        return a @ x + b[:, 0] * u
    if kind == "gr":
        return x + dt * np.array([v * np.cos(x[2]), v * np.sin(x[2]), u])
    raise ValueError(f"unknown kind {kind!r}")


def policy_forward(layers, x: np.ndarray) -> float:
    """Evaluate a ReLU MLP given [(W, b, activation), ...] on one state."""
    h = x
    for w, b, act in layers:
        h = w @ h + b
        if act == "relu":
            h = np.maximum(h, 0.0)
    return float(h[0])


def rollout(kind: str, layers, x0: np.ndarray, steps: int, dt: float,
            v: float = 1.0) -> np.ndarray:
    """Closed-loop trajectory of shape (steps + 1, state_dim)."""
    traj = np.empty((steps + 1, x0.shape[0]))
    traj[0] = x0
    for t in range(steps):
        u = policy_forward(layers, traj[t])
        traj[t + 1] = step(kind, traj[t], u, dt, v)
    return traj
