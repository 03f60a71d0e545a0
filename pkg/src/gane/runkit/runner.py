"""Run loop, resumption, figure-data export and checkpoint evaluation."""

from __future__ import annotations

import csv
import dataclasses
import logging
from pathlib import Path

import numpy as np

from .. import seeding
from ..coevo import evolve_generation, init_run_state
from ..envs import get_spec
from ..experts import make_expert
from ..metrics import evaluate_score, score_report, score_trajectory, trajectory_generations
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import RunConfig

__all__ = ["run", "resume", "export_figures_data", "evaluate_checkpoint", "RunError",
           "CHECKPOINT_NAME", "SCORES_HEADER", "TRAJECTORIES_HEADER", "FITNESS_HEADER"]

log = logging.getLogger("gane")

CHECKPOINT_NAME = "checkpoint.bin"
SCORES_HEADER = ("generation", "elite_score", "population_mean")
TRAJECTORIES_HEADER = ("agent_label", "timestep", "cumulative_reward")
FITNESS_HEADER = ("generation", "elite_generator_fitness", "mean_generator_fitness",
                  "mean_discriminator_fitness")


class RunError(RuntimeError):
    pass


def _prepare_output(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write_probe"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        raise RunError(f"output directory {path} is not writable: {exc}") from None
    return path


def _fresh_checkpoint(config: RunConfig) -> Checkpoint:
    spec = get_spec(config.env)
    state = init_run_state(spec, config.population_size, config.run_seed, config.sigma,
                           config.matches_per_agent, config.elite_unmutated)
    holdout = seeding.holdout_seeds(config.run_seed, config.holdout_seed_count)
    expert_score = evaluate_score(make_expert(spec), spec, state.stats, holdout)
    ledger = {
        "holdout_seeds": holdout,
        "trajectory_seed": seeding.trajectory_seed(config.run_seed, holdout),
        "match_seeds": [],
    }
    history = {"expert_holdout_score": expert_score, "scores": [], "member_scores": [],
               "fitness": []}
    return Checkpoint(config, state, ledger, history, [])


def _advance(ckpt: Checkpoint, out: Path, workers, stop_after) -> Checkpoint:
    config = ckpt.config
    spec = ckpt.state.spec
    expert = make_expert(spec)
    holdout = ckpt.ledger["holdout_seeds"]
    holdout_set = set(holdout)
    marks = set(trajectory_generations(config.generations))
    state = ckpt.state
    steps = 0
    while state.generation < config.generations:
        if stop_after is not None and steps >= stop_after:
            break
        state = evolve_generation(state, workers=workers, expert=expert)
        steps += 1
        rec = state.last
        g = state.generation
        if rec.match_seed in holdout_set:
            raise RunError(f"training seed {rec.match_seed} collides with a holdout seed")
        ckpt.ledger["match_seeds"].append(rec.match_seed)
        ckpt.history["fitness"].append([
            g,
            float(rec.generator_fitness[rec.elite_generator]),
            float(np.mean(rec.generator_fitness)),
            float(np.mean(rec.discriminator_fitness)),
        ])
        if g in marks:
            ckpt.elites.append((g, rec.elite_generator, state.stats, state.generators[rec.elite_generator]))
        if g == 1 or g % config.eval_every == 0 or g == config.generations:
            report = score_report(state, holdout)
            ckpt.history["scores"].append(
                [g, report.elite_index, report.elite_score, report.population_mean_score])
            ckpt.history["member_scores"].append(list(report.member_scores))
            log.info("%s gen %d: elite %.2f, population mean %.2f (expert %.2f)", spec.name, g,
                     report.elite_score, report.population_mean_score,
                     ckpt.history["expert_holdout_score"])
        ckpt.state = state
        if config.checkpoint_every and g % config.checkpoint_every == 0:
            save_checkpoint(ckpt, out / CHECKPOINT_NAME)
    ckpt.state = state
    save_checkpoint(ckpt, out / CHECKPOINT_NAME)
    if state.generation >= config.generations:
        _write_fitness(ckpt, out)
        export_figures_data(out / CHECKPOINT_NAME, out, ckpt=ckpt)
    return ckpt


def run(config: RunConfig, workers: int | None = None, stop_after: int | None = None) -> Path:
    """Execute a run from scratch; returns the output directory.

    ``stop_after`` ends the loop early after that many generations, leaving
    a resumable checkpoint (used to exercise resumption).
    """
    out = _prepare_output(config.resolved_output_dir())
    ckpt = _fresh_checkpoint(config)
    _advance(ckpt, out, workers, stop_after)
    return out


def resume(checkpoint_path, workers: int | None = None, generations: int | None = None,
           stop_after: int | None = None) -> Path:
    """Continue a run from its checkpoint up to the configured generation count.

    ``generations`` extends the target; elite captures that no longer fall
    on the new trajectory marks are dropped.
    """
    path = Path(checkpoint_path)
    ckpt = load_checkpoint(path)
    out = _prepare_output(path.parent)
    if generations is not None and generations != ckpt.config.generations:
        if generations < ckpt.state.generation:
            raise RunError(f"checkpoint is already at generation {ckpt.state.generation}")
        ckpt.config = dataclasses.replace(ckpt.config, generations=generations)
        marks = set(trajectory_generations(generations))
        ckpt.elites = [e for e in ckpt.elites if e[0] in marks]
    if ckpt.state.generation >= ckpt.config.generations:
        log.warning("run already complete at generation %d; nothing to do", ckpt.state.generation)
        return out
    _advance(ckpt, out, workers, stop_after)
    return out


def _write_fitness(ckpt: Checkpoint, out: Path):
    with open(out / "fitness.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FITNESS_HEADER)
        for row in ckpt.history["fitness"]:
            w.writerow([row[0], *(repr(float(v)) for v in row[1:])])


def export_figures_data(checkpoint_path, output_dir, ckpt: Checkpoint | None = None) -> tuple[Path, Path]:
    """Write ``scores.csv`` and ``trajectories.csv`` from a checkpoint.

    Trajectories are played on the run's trajectory seed, which is used
    neither for training nor for holdout scoring.
    """
    if ckpt is None:
        ckpt = load_checkpoint(checkpoint_path)
    scores = ckpt.history.get("scores") or []
    if not scores:
        raise RunError("checkpoint has no score history to export")
    if not ckpt.elites:
        raise RunError("checkpoint has no captured elite genomes to export")
    out = _prepare_output(Path(output_dir))
    spec = ckpt.state.spec
    seed = ckpt.ledger["trajectory_seed"]

    scores_path = out / "scores.csv"
    with open(scores_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCORES_HEADER)
        for g, _, elite, mean in scores:
            w.writerow([g, repr(float(elite)), repr(float(mean))])

    traj_path = out / "trajectories.csv"
    curves = [score_trajectory(make_expert(spec), spec, seed, label="expert")]
    for g, _, stats, genome in ckpt.elites:
        curves.append(score_trajectory(genome, spec, seed, stats, label=f"elite@{g}"))
    with open(traj_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORIES_HEADER)
        for curve in curves:
            for t, value in enumerate(curve.cumulative, 1):
                w.writerow([curve.label, t, repr(float(value))])
    return scores_path, traj_path


def evaluate_checkpoint(checkpoint_path, n_seeds: int = 10) -> dict:
    """Score the checkpoint's current generator population on ``n_seeds`` holdout seeds."""
    ckpt = load_checkpoint(checkpoint_path)
    seeds = seeding.holdout_seeds(ckpt.config.run_seed, n_seeds)
    report = score_report(ckpt.state, seeds)
    return {
        "env": ckpt.config.env,
        "generation": report.generation,
        "elite_index": report.elite_index,
        "elite_score": report.elite_score,
        "population_mean": report.population_mean_score,
        "expert_score": evaluate_score(make_expert(ckpt.state.spec), ckpt.state.spec,
                                       ckpt.state.stats, seeds),
        "holdout_seeds": list(seeds),
    }
