"""
Classic-control tasks and their scripted experts
=================================================

Every task is a small deterministic simulator driven by a 64-bit seed. The
scripted expert of each task is the target behaviour that the generators
learn to imitate.
"""

import numpy as np

from gane.envs import SPECS, env_reset, env_step, get_spec
from gane.experts import COMPETENCE_FLOORS, expert_rollout, make_expert
from gane.seeding import holdout_seeds

# %%
# A task is described by an ``EnvSpec``; resetting with the same seed always
# gives the same start state.
spec = get_spec("CartPole")
state, obs = env_reset(spec, seed=7)
print(spec.name, "observation", obs, "horizon", spec.max_steps)

# %%
# Stepping returns a new state; the old one is left untouched.
state, out = env_step(state, 1)
print("after pushing right:", out.observation, "reward", out.reward)

# %%
# Experts are plain feedback controllers. A rollout records every
# observation, decoded action and reward.
seeds = holdout_seeds(run_seed=0, n=20)
for spec in SPECS.values():
    expert = make_expert(spec)
    returns = [expert_rollout(expert, spec, s).episode_return for s in seeds]
    print(f"{spec.name:>22}: mean return {np.mean(returns):8.1f}"
          f"  (floor {COMPETENCE_FLOORS[spec.env_id]:g})")

# %%
# Traces replay exactly: the recorded actions reproduce the recorded
# observations from the same seed.
trace = expert_rollout(make_expert(get_spec("Acrobot")), get_spec("Acrobot"), seeds[0])
print("Acrobot swing-up in", len(trace), "steps; replay identical:",
      np.array_equal(trace.replay().observations, trace.observations))
