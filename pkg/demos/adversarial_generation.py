"""
A few generations of adversarial neuroevolution
================================================

Generators act in the task; discriminators read whole episodes and score how
expert-like they look. A generator's fitness is the discriminator's score of
its episode, a discriminator's fitness is how much higher it scores the
expert's episode than the generator's.
"""

import numpy as np

from gane.coevo import evolve_generation, init_run_state
from gane.envs import get_spec
from gane.experts import make_expert
from gane.metrics import evaluate_score, score_report
from gane.seeding import holdout_seeds

spec = get_spec("CartPole")
expert = make_expert(spec)
seeds = holdout_seeds(run_seed=0, n=5)

# %%
# All networks start from zero weights; every generation mutates, matches
# generators against discriminators, and keeps the top half of each side.
state = init_run_state(spec, population_size=32, run_seed=0)
print("expert score on held-out seeds:", evaluate_score(expert, spec, state.stats, seeds))

for _ in range(40):
    state = evolve_generation(state, expert=expert)
    rec = state.last
    if state.generation % 5 == 0:
        report = score_report(state, seeds)
        print(f"gen {state.generation:3d}  mean D(x_G) {np.mean(rec.generator_fitness):.3f}"
              f"  mean D fitness {np.mean(rec.discriminator_fitness):+.3f}"
              f"  elite score {report.elite_score:6.1f}  population {report.population_mean_score:6.1f}")

# %%
# The standardizer shared by all networks has absorbed every observation
# seen so far.
print("observations folded into the standardizer:", state.stats.count)
