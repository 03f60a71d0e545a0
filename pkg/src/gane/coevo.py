"""Adversarial co-evolution of generator and discriminator populations.

Each generation runs three stages:

1. variation: every member of both populations receives Gaussian noise;
2. evaluation: each discriminator is paired with one unique generator;
   the generator plays one episode, the expert plays one episode from the
   same initial state, and the discriminator scores both observation
   sequences. The generator's fitness is ``D(x_G)``; the discriminator's
   is ``D(x_T) - D(x_G)``;
3. selection: 50% truncation within each population.

All matches of a generation standardize against a frozen snapshot of the
shared :class:`~gane.standardize.RunningStats`; the per-match deltas are
merged afterwards in match order, so the outcome does not depend on how
many worker threads evaluated the matches.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from . import seeding
from .envs import (
    EnvSpec,
    EpisodeTrace,
    decode_kernel,
    initial_physics,
    observe_kernel,
    step_kernel,
)
from .experts import ExpertPolicy, expert_rollout, make_expert
from .net import Genome, NetTopology, forward_kernel, mutate, zero_genome
from .standardize import RunningStats, std_merge, std_update_batch

__all__ = [
    "Population",
    "MatchResult",
    "GenerationRecord",
    "RunState",
    "EpisodeTrace",
    "pair_populations",
    "discriminate",
    "generator_rollout",
    "run_match",
    "select_truncate",
    "init_run_state",
    "evolve_generation",
    "generator_topology",
    "discriminator_topology",
]

TAGS = ("generator", "discriminator")


@dataclass(frozen=True)
class Population:
    tag: str
    members: tuple
    generation: int = 0

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"population tag must be one of {TAGS}")
        object.__setattr__(self, "members", tuple(self.members))

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, i) -> Genome:
        return self.members[i]


@dataclass(frozen=True)
class MatchResult:
    generator_index: int
    discriminator_index: int
    d_of_xg: float
    d_of_xt: float
    fit_g: float
    fit_d: float
    generator_trace: EpisodeTrace = field(repr=False)
    expert_trace: EpisodeTrace = field(repr=False)


def generator_topology(spec: EnvSpec) -> NetTopology:
    return NetTopology.paper(spec.obs_dim, spec.n_actions)


def discriminator_topology(spec: EnvSpec) -> NetTopology:
    return NetTopology.paper(spec.obs_dim, 1)


# ---------------------------------------------------------------------------
# compiled episode loops


@njit(cache=True, nogil=True)
def _standardize(obs, mean, scale, active, out):
    if active:
        for i in range(obs.shape[0]):
            out[i] = (obs[i] - mean[i]) / scale[i]
    else:
        for i in range(obs.shape[0]):
            out[i] = 0.0


@njit(cache=True, nogil=True)
def _generator_episode(code, physics, max_steps, params, sizes, rec, mean, scale, active,
                       discrete, low, high, obs_buf, act_buf, rew_buf):
    h = np.zeros(sizes[rec + 1])
    x = np.empty(obs_buf.shape[1])
    observe_kernel(code, physics, obs_buf[0])
    for t in range(max_steps):
        _standardize(obs_buf[t], mean, scale, active, x)
        out, h = forward_kernel(params, sizes, rec, x, h)
        decode_kernel(discrete, out, low, high, act_buf[t])
        reward, terminated = step_kernel(code, physics, act_buf[t])
        rew_buf[t] = reward
        observe_kernel(code, physics, obs_buf[t + 1])
        if terminated:
            return t + 1, True
    return max_steps, False


@njit(cache=True, nogil=True)
def _discriminate(observations, params, sizes, rec, mean, scale, active):
    h = np.zeros(sizes[rec + 1])
    x = np.empty(observations.shape[1])
    total = 0.0
    for t in range(observations.shape[0]):
        _standardize(observations[t], mean, scale, active, x)
        out, h = forward_kernel(params, sizes, rec, x, h)
        v = out[0]
        if v > 1.0:
            v = 1.0
        elif v < 0.0:
            v = 0.0
        total += v
    return total / observations.shape[0]


def _snapshot(stats: RunningStats):
    return stats.mean, stats.scale, stats.count > 0


def _sizes(genome: Genome) -> np.ndarray:
    return np.array(genome.topology.sizes, dtype=np.int64)


# ---------------------------------------------------------------------------
# operations


def generator_rollout(genome: Genome, spec: EnvSpec, seed: int, stats: RunningStats) -> EpisodeTrace:
    """Play one episode with ``genome`` acting on standardized observations."""
    topo = genome.topology
    if topo.input_dim != spec.obs_dim or topo.output_dim != spec.n_actions:
        raise ValueError(
            f"generator topology {topo.sizes} does not fit {spec.name} "
            f"(obs {spec.obs_dim}, actions {spec.n_actions})"
        )
    physics = initial_physics(spec, np.random.default_rng(int(seed))).astype(np.float64)
    obs_buf = np.empty((spec.max_steps + 1, spec.obs_dim))
    act_buf = np.empty((spec.max_steps, spec.action_dim))
    rew_buf = np.empty(spec.max_steps)
    if stats.dim != spec.obs_dim:
        raise ValueError(f"standardizer has dimension {stats.dim}, {spec.name} observations {spec.obs_dim}")
    mean, scale, active = _snapshot(stats)
    n, terminated = _generator_episode(
        int(spec.env_id), physics, spec.max_steps, genome.params, _sizes(genome),
        topo.recurrent_layer_index, mean, scale, active, spec.discrete,
        np.array(spec.low, dtype=np.float64), np.array(spec.high, dtype=np.float64),
        obs_buf, act_buf, rew_buf,
    )
    return EpisodeTrace(
        spec.env_id, obs_buf[: n + 1].copy(), act_buf[:n].copy(), rew_buf[:n].copy(),
        bool(terminated), not terminated, int(seed),
    )


def discriminate(discriminator: Genome, trace_observations, stats: RunningStats) -> float:
    """Mean over time steps of the clipped discriminator output, in [0, 1]."""
    obs = np.ascontiguousarray(trace_observations, dtype=np.float64)
    if obs.ndim != 2 or obs.shape[0] == 0:
        raise ValueError("discriminate needs a non-empty (steps, obs_dim) sequence")
    topo = discriminator.topology
    if topo.output_dim != 1 or topo.input_dim != obs.shape[1]:
        raise ValueError(f"discriminator topology {topo.sizes} cannot score {obs.shape[1]}-d observations")
    if stats.dim != obs.shape[1]:
        raise ValueError(f"standardizer has dimension {stats.dim}, observations {obs.shape[1]}")
    mean, scale, active = _snapshot(stats)
    return float(_discriminate(obs, discriminator.params, _sizes(discriminator),
                               topo.recurrent_layer_index, mean, scale, active))


def _trace_stats(trace: EpisodeTrace) -> RunningStats:
    return std_update_batch(RunningStats.empty(trace.observations.shape[1]), trace.observations)


def run_match(
    generator: Genome,
    discriminator: Genome,
    expert: ExpertPolicy,
    spec: EnvSpec,
    match_seed: int,
    stats: RunningStats,
    expert_trace: EpisodeTrace | None = None,
    generator_index: int = 0,
    discriminator_index: int = 0,
) -> tuple[MatchResult, RunningStats]:
    """Play one generator/discriminator match.

    ``expert_trace`` may be passed in when it has already been rolled out
    on ``match_seed``; the expert is deterministic so the result is the
    same.
    """
    x_g = generator_rollout(generator, spec, match_seed, stats)
    if expert_trace is None:
        expert_trace = expert_rollout(expert, spec, match_seed)
    elif expert_trace.env_seed != match_seed:
        raise ValueError("expert trace was rolled out on a different seed")
    d_g = discriminate(discriminator, x_g.observations, stats)
    d_t = discriminate(discriminator, expert_trace.observations, stats)
    result = MatchResult(generator_index, discriminator_index, d_g, d_t, d_g, d_t - d_g,
                         x_g, expert_trace)
    delta = std_merge(_trace_stats(x_g), _trace_stats(expert_trace))
    return result, delta


def pair_populations(size: int, seed: int) -> np.ndarray:
    """Random bijection: entry ``k`` is the discriminator facing generator ``k``."""
    if size < 2:
        raise ValueError("populations need at least two members")
    return np.random.default_rng(int(seed)).permutation(size)


def select_truncate(fitnesses) -> np.ndarray:
    """50% truncation selection.

    Returns ``source`` with ``source[i]`` the index whose genome occupies
    slot ``i`` after selection. Survivors keep their slots; the survivor of
    rank ``k`` is copied over the member of rank ``n/2 + k``. Ties rank the
    lower index first.
    """
    fit = np.asarray(fitnesses, dtype=np.float64)
    n = fit.shape[0]
    if n < 2 or n % 2:
        raise ValueError("selection needs an even number (>= 2) of fitnesses")
    if np.any(np.isnan(fit)):
        raise ValueError("fitness values must not be NaN")
    order = sorted(range(n), key=lambda i: (-fit[i], i))
    source = np.arange(n)
    half = n // 2
    for k in range(half):
        source[order[half + k]] = order[k]
    return source


def _elite(fitnesses) -> int:
    fit = np.asarray(fitnesses)
    return int(np.flatnonzero(fit == fit.max())[0])


@dataclass(frozen=True)
class GenerationRecord:
    """Everything observed while evaluating one generation."""

    generation: int
    match_seed: int
    pairings: tuple
    matches: tuple = field(repr=False)
    generator_fitness: np.ndarray = field(repr=False)
    discriminator_fitness: np.ndarray = field(repr=False)
    elite_generator: int = 0
    elite_discriminator: int = 0
    generator_source: np.ndarray = field(repr=False, default=None)
    discriminator_source: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class RunState:
    """Complete state between generations.

    ``generation`` counts completed generations; the populations are the
    post-selection ones and ``stats`` already includes every observation
    gathered so far.
    """

    spec: EnvSpec
    run_seed: int
    generators: Population
    discriminators: Population
    stats: RunningStats
    generation: int = 0
    sigma: float = 0.1
    matches_per_agent: int = 1
    elite_unmutated: bool = False
    elite_indices: tuple | None = None
    last: GenerationRecord | None = field(default=None, repr=False, compare=False)

    @property
    def population_size(self) -> int:
        return len(self.generators)


def init_run_state(spec: EnvSpec, population_size: int = 64, run_seed: int = 0, sigma: float = 0.1,
                   matches_per_agent: int = 1, elite_unmutated: bool = False) -> RunState:
    """Zero-initialized populations of equal, even size."""
    if population_size < 2 or population_size % 2:
        raise ValueError("population_size must be even and >= 2")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if matches_per_agent < 1:
        raise ValueError("matches_per_agent must be >= 1")
    gens = Population("generator", [zero_genome(generator_topology(spec)) for _ in range(population_size)])
    discs = Population("discriminator",
                       [zero_genome(discriminator_topology(spec)) for _ in range(population_size)])
    return RunState(spec, int(run_seed), gens, discs, RunningStats.empty(spec.obs_dim), 0,
                    float(sigma), int(matches_per_agent), bool(elite_unmutated))


def _vary(state: RunState, population: Population, g: int, keep: int | None) -> list[Genome]:
    members = []
    for i, genome in enumerate(population.members):
        if keep is not None and i == keep:
            members.append(genome)
        else:
            seed = seeding.mutation_seed(state.run_seed, g, population.tag, i)
            members.append(mutate(genome, seed, state.sigma))
    return members


def evolve_generation(state: RunState, workers: int | None = None,
                      expert: ExpertPolicy | None = None) -> RunState:
    """Run variation, evaluation and selection once.

    ``workers`` sets the number of evaluation threads (default: CPU count);
    the result is identical for any value.
    """
    spec = state.spec
    g = state.generation
    n = state.population_size
    expert = expert or make_expert(spec)
    keep_g = keep_d = None
    if state.elite_unmutated and state.elite_indices is not None:
        keep_g, keep_d = state.elite_indices

    generators = _vary(state, state.generators, g, keep_g)
    discriminators = _vary(state, state.discriminators, g, keep_d)

    snapshot = state.stats
    seed = seeding.match_seed(state.run_seed, g)
    expert_trace = expert_rollout(expert, spec, seed)
    pairings = tuple(
        pair_populations(n, seeding.pairing_seed(state.run_seed, g, r))
        for r in range(state.matches_per_agent)
    )
    jobs = [(k, int(p[k])) for p in pairings for k in range(n)]

    def play(job):
        gi, di = job
        return run_match(generators[gi], discriminators[di], expert, spec, seed, snapshot,
                         expert_trace, gi, di)

    workers = workers or os.cpu_count() or 1
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(play, jobs))
    else:
        outcomes = [play(job) for job in jobs]

    fit_g = np.zeros(n)
    fit_d = np.zeros(n)
    stats = snapshot
    for result, delta in outcomes:
        fit_g[result.generator_index] += result.fit_g
        fit_d[result.discriminator_index] += result.fit_d
        stats = std_merge(stats, delta)
    if state.matches_per_agent > 1:
        fit_g /= state.matches_per_agent
        fit_d /= state.matches_per_agent

    src_g = select_truncate(fit_g)
    src_d = select_truncate(fit_d)
    elite_g = _elite(fit_g)
    elite_d = _elite(fit_d)
    record = GenerationRecord(
        g, seed, pairings, tuple(r for r, _ in outcomes), fit_g, fit_d, elite_g, elite_d, src_g, src_d
    )
    return replace(
        state,
        generators=Population("generator", [generators[s] for s in src_g], g + 1),
        discriminators=Population("discriminator", [discriminators[s] for s in src_d], g + 1),
        stats=stats,
        generation=g + 1,
        elite_indices=(elite_g, elite_d),
        last=record,
    )
