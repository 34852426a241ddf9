"""Imitation training of neural controllers from an MPC expert."""

__version__ = "0.1.0"

from .train import TrainConfig, train_policy
from .expert import ExpertError, di_expert, gr_expert
from .sim import policy_forward, rollout, step

__all__ = [
    "TrainConfig",
    "train_policy",
    "ExpertError",
    "di_expert",
    "gr_expert",
    "policy_forward",
    "rollout",
    "step",
]
