"""Held-out scoring and per-step score trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coevo import RunState, generator_rollout
from .envs import EnvSpec, EpisodeTrace
from .experts import ExpertPolicy, expert_rollout
from .net import Genome
from .standardize import RunningStats

__all__ = [
    "ScoreReport",
    "Trajectory",
    "evaluate_score",
    "score_report",
    "score_trajectory",
    "trajectory_rmse",
    "trajectory_generations",
]


@dataclass(frozen=True)
class ScoreReport:
    generation: int
    elite_index: int
    elite_score: float
    population_mean_score: float
    member_scores: tuple
    holdout_seeds: tuple


@dataclass(frozen=True)
class Trajectory:
    """Cumulative reward after each step of one episode."""

    label: str
    cumulative: np.ndarray
    env_seed: int

    def __len__(self) -> int:
        return self.cumulative.shape[0]

    @property
    def final(self) -> float:
        return float(self.cumulative[-1]) if len(self) else 0.0


def _episode(agent, spec: EnvSpec, seed: int, stats: RunningStats) -> EpisodeTrace:
    if isinstance(agent, ExpertPolicy):
        return expert_rollout(agent, spec, seed)
    if isinstance(agent, Genome):
        return generator_rollout(agent, spec, seed, stats)
    raise TypeError(f"cannot roll out {type(agent).__name__}")


def evaluate_score(agent, spec: EnvSpec, stats: RunningStats, holdout_seeds) -> float:
    """Mean undiscounted return over the held-out environment instances."""
    seeds = list(holdout_seeds)
    if not seeds:
        raise ValueError("evaluate_score needs at least one holdout seed")
    returns = [_episode(agent, spec, s, stats).episode_return for s in seeds]
    return math.fsum(returns) / len(returns)


def score_report(state: RunState, holdout_seeds, elite_index: int | None = None) -> ScoreReport:
    """Score every generator of ``state`` on the holdout instances.

    The elite defaults to the fitness elite of the last evaluated generation,
    which keeps its slot through selection.
    """
    if elite_index is None:
        elite_index = state.elite_indices[0] if state.elite_indices else 0
    seeds = tuple(int(s) for s in holdout_seeds)
    cache: dict[int, float] = {}
    scores = []
    for genome in state.generators.members:
        key = id(genome)
        if key not in cache:
            cache[key] = evaluate_score(genome, state.spec, state.stats, seeds)
        scores.append(cache[key])
    return ScoreReport(
        state.generation,
        int(elite_index),
        scores[elite_index],
        math.fsum(scores) / len(scores),
        tuple(scores),
        seeds,
    )


def score_trajectory(agent, spec: EnvSpec, seed: int, stats: RunningStats | None = None,
                     label: str | None = None) -> Trajectory:
    if stats is None:
        stats = RunningStats.empty(spec.obs_dim)
    trace = _episode(agent, spec, seed, stats)
    if label is None:
        label = "expert" if isinstance(agent, ExpertPolicy) else "generator"
    cumulative = np.empty(len(trace))
    total = 0.0
    for t, r in enumerate(trace.rewards):
        total += r
        cumulative[t] = total
    return Trajectory(label, cumulative, int(seed))


def trajectory_rmse(a: Trajectory, b: Trajectory) -> float:
    """RMS gap between two cumulative-reward curves.

    The shorter curve is extended by holding its final value.
    """
    x, y = np.asarray(a.cumulative, dtype=np.float64), np.asarray(b.cumulative, dtype=np.float64)
    n = max(x.shape[0], y.shape[0])
    if n == 0:
        return 0.0

    def pad(c):
        if c.shape[0] == n:
            return c
        fill = c[-1] if c.shape[0] else 0.0
        return np.concatenate([c, np.full(n - c.shape[0], fill)])

    d = pad(x) - pad(y)
    return float(np.sqrt(np.mean(d * d)))


def trajectory_generations(total: int) -> list[int]:
    """Completed-generation counts at which elites are captured.

    First generation, then 25%, 50%, 75% and 100% of ``total``
    (duplicates removed for very short runs).
    """
    if total < 1:
        raise ValueError("total must be >= 1")
    marks = [1] + [max(1, math.ceil(total * f)) for f in (0.25, 0.5, 0.75)] + [total]
    return sorted(set(marks))
