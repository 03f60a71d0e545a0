"""Scripted expert controllers used as the imitation target.

Each controller is a small hand-designed feedback law with gains pinned
below. They are deterministic given the observation and a per-episode
scratch dictionary, and every emitted action lies inside the task's
action bounds.

=====================  ==================================================
Task                   Controller
=====================  ==================================================
CartPole               push right iff 0.5 x + 1.0 x' + 10 th + 2 th' > 0
MountainCar            push along velocity; from rest, push left when
                       position > -0.48 else right
MountainCarContinuous  thrust 0.6 along velocity; from rest, thrust left
                       when position > -0.45 else right
Pendulum               bang-bang energy pumping, PD catch near upright
                       (entered at cos th > 0.85, left at cos th < 0.6)
Acrobot                torque +1 iff -th1' + 0.1 th2' > 0, else -1
=====================  ==================================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .envs import EnvId, EnvSpec, EpisodeTrace, SPECS, env_reset, env_step

__all__ = [
    "ExpertPolicy",
    "make_expert",
    "expert_act",
    "expert_rollout",
    "DEFAULT_GAINS",
    "COMPETENCE_FLOORS",
]

DEFAULT_GAINS = {
    EnvId.CARTPOLE: {"k_x": 0.5, "k_xdot": 1.0, "k_theta": 10.0, "k_thetadot": 2.0},
    EnvId.MOUNTAINCAR: {"rest_switch": -0.48},
    EnvId.MOUNTAINCAR_CONTINUOUS: {"thrust": 0.6, "rest_switch": -0.45},
    EnvId.PENDULUM: {"k_p": 10.0, "k_d": 2.0, "catch_cos": 0.85, "release_cos": 0.6},
    EnvId.ACROBOT: {"k_dtheta1": -1.0, "k_dtheta2": 0.1},
}

# Regression floors on the mean return over 100 held-out seeds, fixed after
# a rollout campaign with the gains above.
COMPETENCE_FLOORS = {
    EnvId.CARTPOLE: 475.0,
    EnvId.MOUNTAINCAR: -110.0,
    EnvId.MOUNTAINCAR_CONTINUOUS: 90.0,
    EnvId.PENDULUM: -250.0,
    EnvId.ACROBOT: -100.0,
}

# natural frequency squared of the pendulum dynamics (3 g / 2 l)
_PENDULUM_OMEGA2 = 15.0


@dataclass(frozen=True)
class ExpertPolicy:
    env_id: EnvId
    gains: dict = field(default_factory=dict)

    @property
    def spec(self) -> EnvSpec:
        return SPECS[self.env_id]


def make_expert(env) -> ExpertPolicy:
    """Build the expert for a task given as :class:`EnvSpec`, id or name."""
    from .envs import get_spec

    spec = get_spec(env)
    return ExpertPolicy(spec.env_id, dict(DEFAULT_GAINS[spec.env_id]))


def _cartpole(g, obs, scratch):
    x, x_dot, theta, theta_dot = obs
    u = g["k_x"] * x + g["k_xdot"] * x_dot + g["k_theta"] * theta + g["k_thetadot"] * theta_dot
    return (1 if u > 0 else 0), scratch


def _mountaincar(g, obs, scratch):
    position, velocity = obs
    if velocity == 0.0:
        return (0 if position > g["rest_switch"] else 2), scratch
    return (2 if velocity > 0 else 0), scratch


def _mountaincar_continuous(g, obs, scratch):
    position, velocity = obs
    k = g["thrust"]
    if velocity == 0.0:
        a = -k if position > g["rest_switch"] else k
    else:
        a = k if velocity > 0 else -k
    return np.array([a]), scratch


def _pendulum(g, obs, scratch):
    cos_th, sin_th, omega = obs
    catching = scratch.get("catching", False)
    if catching and cos_th < g["release_cos"]:
        catching = False
    elif not catching and cos_th > g["catch_cos"]:
        catching = True
    if catching:
        theta = math.atan2(sin_th, cos_th)
        u = -(g["k_p"] * theta + g["k_d"] * omega)
    else:
        # energy relative to the upright rest state, normalised by 3g/2l
        energy = 0.5 * omega * omega / _PENDULUM_OMEGA2 + (cos_th - 1.0)
        direction = 1.0 if omega >= 0 else -1.0
        u = 2.0 * direction if energy < 0 else -2.0 * direction
    u = min(2.0, max(-2.0, u))
    return np.array([u]), {"catching": catching}


def _acrobot(g, obs, scratch):
    u = g["k_dtheta1"] * obs[4] + g["k_dtheta2"] * obs[5]
    return (2 if u > 0 else 0), scratch


_CONTROLLERS = {
    EnvId.CARTPOLE: _cartpole,
    EnvId.MOUNTAINCAR: _mountaincar,
    EnvId.MOUNTAINCAR_CONTINUOUS: _mountaincar_continuous,
    EnvId.PENDULUM: _pendulum,
    EnvId.ACROBOT: _acrobot,
}


def expert_act(policy: ExpertPolicy, observation, scratch: dict | None = None):
    """Return ``(action, scratch)`` for one observation.

    ``scratch`` carries per-episode controller memory; pass ``None`` at the
    start of an episode.
    """
    obs = np.asarray(observation, dtype=np.float64)
    if obs.shape != (policy.spec.obs_dim,):
        raise ValueError(
            f"{policy.spec.name} expert expects observation of shape "
            f"({policy.spec.obs_dim},), got {obs.shape}"
        )
    return _CONTROLLERS[policy.env_id](policy.gains, obs, dict(scratch or {}))


def expert_rollout(policy: ExpertPolicy, spec: EnvSpec, seed: int) -> EpisodeTrace:
    """Run one full episode under expert control."""
    if spec.env_id != policy.env_id:
        raise ValueError(f"expert for {policy.spec.name} cannot act in {spec.name}")
    state, obs = env_reset(spec, seed)
    observations = [obs]
    actions = []
    rewards = []
    scratch = None
    while True:
        action, scratch = expert_act(policy, obs, scratch)
        state, out = env_step(state, action)
        obs = out.observation
        observations.append(obs)
        actions.append(np.atleast_1d(np.asarray(action, dtype=np.float64)))
        rewards.append(out.reward)
        if out.terminated or out.truncated:
            break
    return EpisodeTrace(
        spec.env_id,
        np.array(observations),
        np.array(actions),
        np.array(rewards, dtype=np.float64),
        out.terminated,
        out.truncated,
        int(seed),
    )
