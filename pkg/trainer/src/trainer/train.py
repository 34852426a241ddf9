"""Dataset generation, training, and export.

Controllers imitate a receding-horizon expert: initial states are sampled
from a task-specific box, the expert is rolled out in closed loop, and
every visited (state, expert input) pair becomes a regression sample.  The
trained net is exported in the verifier's portable weights format together
with a held-out closed-loop rollout report.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .expert import ExpertError, di_expert, gr_expert
from .mlp import forward_batch, init_layers, train_mlp
from .sim import rollout, step

__all__ = ["TrainConfig", "train_policy"]

log = logging.getLogger("trainer")

# task-specific defaults; the task statement fixes only the architectures
_TASKS = {
    "di": {
        "hidden": [30, 20, 10],
        "state_dim": 2,
        "dt": 0.2,
        "rollout_steps": 30,
        "sample_box": (np.array([0.3, -0.9]), np.array([3.5, 0.6])),
        "report_box": (np.array([2.25, -0.25]), np.array([2.75, 0.25])),
    },
    "gr": {
        "hidden": [40, 20, 10],
        "state_dim": 3,
        "dt": 0.2,
        "rollout_steps": 52,
        "sample_box": (np.array([-10.0, -5.0, 0.3]), np.array([-8.6, -3.8, 0.9])),
        "report_box": (np.array([-9.6, -4.6, 0.55]), np.array([-9.3, -4.3, 0.65])),
    },
}

_GR_OBSTACLES = (((-6.0, -0.5), 2.2), ((-1.25, 1.75), 1.6))


@dataclass
class TrainConfig:
    kind: str
    out: str
    hidden: list[int] = field(default_factory=list)
    expert_horizon: int = 0  # 0 = task default
    dataset_size: int = 2000
    epochs: int = 300
    seed: int = 0
    weight_decay: float = 1e-4

    def __post_init__(self):
        if self.kind not in _TASKS:
            raise ValueError(f"kind must be one of {sorted(_TASKS)}, got {self.kind!r}")
        if not self.hidden:
            self.hidden = list(_TASKS[self.kind]["hidden"])
        if self.expert_horizon == 0:
            self.expert_horizon = 12 if self.kind == "di" else 20
        if self.dataset_size < 1 or self.epochs < 1:
            raise ValueError("dataset_size and epochs must be positive")


def _expert_input(kind: str, x: np.ndarray, dt: float, horizon: int) -> float:
    if kind == "di":
        return di_expert(x, dt, horizon=horizon)
    return gr_expert(x, dt, horizon=horizon)


def build_dataset(cfg: TrainConfig, rng: np.random.Generator):
    """Closed-loop expert rollouts until cfg.dataset_size pairs are collected."""
    task = _TASKS[cfg.kind]
    lo, hi = task["sample_box"]
    dt, steps = task["dt"], task["rollout_steps"]
    xs, us = [], []
    failures = 0
    while len(xs) < cfg.dataset_size:
        x = rng.uniform(lo, hi)
        for _ in range(steps):
            try:
                u = _expert_input(cfg.kind, x, dt, cfg.expert_horizon)
            except ExpertError as exc:
                failures += 1
                log.warning("expert failed, skipping sample: %s", exc)
                break
            xs.append(x.copy())
            us.append(u)
            x = step("gr" if cfg.kind == "gr" else "di", x, u, dt)
            if len(xs) >= cfg.dataset_size:
                break
        if failures > 50 and not xs:
            break
    if len(xs) < max(10, cfg.dataset_size // 10):
        raise RuntimeError(
            f"expert produced only {len(xs)} samples "
            f"({failures} solver failures); cannot train"
        )
    return np.array(xs), np.array(us)[:, None]


def _rollout_report(cfg: TrainConfig, layers, rng: np.random.Generator) -> dict:
    """Held-out closed-loop metrics from fresh initial states."""
    task = _TASKS[cfg.kind]
    lo, hi = task["report_box"]
    goal_dists, violations = [], 0
    n = 20
    for _ in range(n):
        x0 = rng.uniform(lo, hi)
        traj = rollout("gr" if cfg.kind == "gr" else "di",
                       layers, x0, task["rollout_steps"], task["dt"])
        if cfg.kind == "di":
            goal_dists.append(float(np.linalg.norm(traj[-1])))
            violations += int(np.any(traj[:, 0] < 0.0) or np.any(traj[:, 1] < -1.0))
        else:
            goal_dists.append(float(np.linalg.norm(traj[-1, :2])))
            for (cx, cy), rad in _GR_OBSTACLES:
                d = np.hypot(traj[:, 0] - cx, traj[:, 1] - cy)
                if np.any(d < rad):
                    violations += 1
                    break
    return {
        "kind": cfg.kind,
        "rollouts": n,
        "mean_goal_distance": float(np.mean(goal_dists)),
        "max_goal_distance": float(np.max(goal_dists)),
        "rollouts_with_constraint_violation": violations,
    }


def _write_json(path, data) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def train_policy(cfg: TrainConfig) -> Path:
    """Train and export; returns the weights path.  The rollout report is
    written next to it with a .report.json suffix."""
    rng = np.random.default_rng(cfg.seed)
    x, y = build_dataset(cfg, rng)
    log.info("dataset: %d pairs", x.shape[0])

    # trained on raw states: folding an input normalization into the first
    # layer would scale its weights by 1/std and loosen downstream
    # linear-relaxation bounds
    dims = [x.shape[1], *cfg.hidden, 1]
    layers = init_layers(rng, dims)
    losses = train_mlp(layers, x, y, cfg.epochs, rng,
                       weight_decay=cfg.weight_decay)
    log.info("final training loss: %.6f", losses[-1])

    out = Path(cfg.out)
    _write_json(out, {
        "format_version": 1,
        "input_dim": dims[0],
        "layers": [
            {"weights": w.tolist(), "bias": b.tolist(), "activation": act}
            for w, b, act in layers
        ],
    })
    report = _rollout_report(cfg, layers, np.random.default_rng(cfg.seed + 1))
    report["final_training_loss"] = losses[-1]
    _write_json(out.with_suffix(".report.json"), report)
    return out
