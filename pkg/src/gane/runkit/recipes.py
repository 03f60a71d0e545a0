"""Summaries of finished runs in terms of the reproduction targets."""

from __future__ import annotations

from dataclasses import dataclass

from ..experts import make_expert
from ..metrics import score_trajectory, trajectory_rmse
from .checkpoint import Checkpoint, load_checkpoint

__all__ = ["attainment_threshold", "RunSummary", "summarize"]


def attainment_threshold(expert_score: float, fraction: float = 0.9) -> float:
    """Score counted as reaching ``fraction`` of the expert's level.

    ``expert - (1 - fraction) * |expert|``: equal to ``fraction * expert``
    for positive scores, and still below the expert for negative ones.
    """
    return expert_score - (1.0 - fraction) * abs(expert_score)


@dataclass(frozen=True)
class RunSummary:
    env: str
    run_seed: int
    generations: int
    expert_score: float
    threshold: float
    best_elite_score: float
    first_reached: int | None
    first_elite_score: float
    final_elite_score: float
    rmse_first: float
    rmse_final: float

    @property
    def reached(self) -> bool:
        return self.first_reached is not None

    @property
    def trajectory_improved(self) -> bool:
        return self.rmse_final < self.rmse_first


def summarize(ckpt, fraction: float = 0.9) -> RunSummary:
    """Condense a finished run (``Checkpoint`` or path)."""
    if not isinstance(ckpt, Checkpoint):
        ckpt = load_checkpoint(ckpt)
    spec = ckpt.state.spec
    expert_score = ckpt.history["expert_holdout_score"]
    threshold = attainment_threshold(expert_score, fraction)
    scores = ckpt.history["scores"]
    first_reached = next((g for g, _, e, _ in scores if e >= threshold), None)
    seed = ckpt.ledger["trajectory_seed"]
    expert_curve = score_trajectory(make_expert(spec), spec, seed)
    first = ckpt.elites[0]
    last = ckpt.elites[-1]
    rmse = [trajectory_rmse(score_trajectory(genome, spec, seed, stats), expert_curve)
            for _, _, stats, genome in (first, last)]
    return RunSummary(
        spec.name, ckpt.config.run_seed, ckpt.state.generation, expert_score, threshold,
        max(e for _, _, e, _ in scores), first_reached, scores[0][2], scores[-1][2], rmse[0], rmse[1],
    )
