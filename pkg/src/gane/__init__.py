"""Generative adversarial neuroevolution for imitating control behaviour.

Two populations of recurrent networks co-evolve: generators act in a
classic-control task, discriminators score whole observation sequences as
expert-like or not. Generators are rewarded for fooling discriminators,
discriminators for telling the expert's episode from the generator's.
"""

from .coevo import evolve_generation, init_run_state, run_match
from .envs import SPECS, EnvId, action_decode, env_reset, env_step, get_spec
from .experts import expert_rollout, make_expert
from .metrics import evaluate_score, score_report, score_trajectory, trajectory_rmse
from .net import NetTopology, forward, mutate, param_count, zero_genome
from .standardize import RunningStats, std_apply, std_merge, std_update

__version__ = "0.1.0"

__all__ = [
    "EnvId",
    "NetTopology",
    "RunningStats",
    "SPECS",
    "action_decode",
    "env_reset",
    "env_step",
    "evaluate_score",
    "evolve_generation",
    "expert_rollout",
    "forward",
    "get_spec",
    "init_run_state",
    "make_expert",
    "mutate",
    "param_count",
    "run_match",
    "score_report",
    "score_trajectory",
    "std_apply",
    "std_merge",
    "std_update",
    "trajectory_rmse",
    "zero_genome",
]
