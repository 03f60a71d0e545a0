"""Deterministic classic-control environments.

Five tasks are re-implemented with the constants of the widely used
classic-control suite, in 64-bit floats throughout:

============================  ======  ===========================  =========
Task                          obs     actions                      max_steps
============================  ======  ===========================  =========
CartPole                      4       discrete(2)                  500
MountainCar                   2       discrete(3)                  200
MountainCarContinuous         2       continuous [-1, 1]           999
Pendulum                      3       continuous [-2, 2]           200
Acrobot                       6       discrete(3)                  500
============================  ======  ===========================  =========

Dynamics constants
------------------
CartPole
    g = 9.8, cart mass 1.0, pole mass 0.1, pole half-length 0.5,
    force 10.0, explicit Euler with tau = 0.02, failure at |x| > 2.4 or
    |theta| > 12 degrees. Reward +1 per step, including the failing one.
MountainCar
    force 0.001, gravity 0.0025, speed limit 0.07, position in
    [-1.2, 0.6], goal at position >= 0.5 with velocity >= 0. Reward -1 per
    step.
MountainCarContinuous
    power 0.0015, gravity 0.0025, same track as MountainCar, goal at
    position >= 0.45. Reward -0.1 * a**2 per step plus 100 on the goal step.
Pendulum
    g = 10.0, m = 1.0, l = 1.0, dt = 0.05, torque in [-2, 2], speed limit 8.
    Reward -(theta**2 + 0.1 * theta_dot**2 + 0.001 * u**2) with theta
    wrapped to [-pi, pi), computed on the pre-step state.
Acrobot
    link lengths 1.0, masses 1.0, centres of mass 0.5, moments of inertia
    1.0, g = 9.8, dt = 0.2, one RK4 step per transition ("book" dynamics),
    torques {-1, 0, +1}, speed limits 4*pi and 9*pi, goal when the tip
    rises one link length above the pivot. Reward -1 per step, 0 on the
    goal step.

The transition kernels are compiled with numba (no fast-math) so that the
rollout loops in :mod:`gane.coevo` run entirely in native code while
staying bit-for-bit reproducible.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

__all__ = [
    "EnvId",
    "EnvSpec",
    "EnvState",
    "StepOutcome",
    "SPECS",
    "get_spec",
    "env_reset",
    "env_step",
    "action_decode",
    "initial_physics",
    "observe",
    "EpisodeTrace",
]


class EnvId(enum.IntEnum):
    CARTPOLE = 0
    MOUNTAINCAR = 1
    MOUNTAINCAR_CONTINUOUS = 2
    PENDULUM = 3
    ACROBOT = 4


_NAMES = {
    EnvId.CARTPOLE: "CartPole",
    EnvId.MOUNTAINCAR: "MountainCar",
    EnvId.MOUNTAINCAR_CONTINUOUS: "MountainCarContinuous",
    EnvId.PENDULUM: "Pendulum",
    EnvId.ACROBOT: "Acrobot",
}


@dataclass(frozen=True)
class EnvSpec:
    """Static description of a task.

    Attributes
    ----------
    env_id : EnvId
    obs_dim : int
        Length of the observation vector.
    discrete : bool
        True for tasks whose action is an index.
    n_actions : int
        Number of discrete actions, or the action dimension for continuous
        tasks. This is also the generator's output width.
    low, high : tuple of float
        Continuous action bounds (empty for discrete tasks).
    max_steps : int
        Truncation horizon.
    """

    env_id: EnvId
    obs_dim: int
    discrete: bool
    n_actions: int
    low: tuple = ()
    high: tuple = ()
    max_steps: int = 200

    def __post_init__(self):
        if self.obs_dim < 1 or self.n_actions < 1 or self.max_steps < 1:
            raise ValueError("dimensions and horizon must be positive")
        if not self.discrete:
            if len(self.low) != self.n_actions or len(self.high) != self.n_actions:
                raise ValueError("continuous bounds must match the action dimension")
            if any(lo >= hi for lo, hi in zip(self.low, self.high)):
                raise ValueError("continuous bounds require low < high")

    @property
    def name(self) -> str:
        return _NAMES[self.env_id]

    @property
    def action_dim(self) -> int:
        """Width of a stored action record (1 for discrete tasks)."""
        return 1 if self.discrete else self.n_actions


SPECS = {
    EnvId.CARTPOLE: EnvSpec(EnvId.CARTPOLE, 4, True, 2, max_steps=500),
    EnvId.MOUNTAINCAR: EnvSpec(EnvId.MOUNTAINCAR, 2, True, 3, max_steps=200),
    EnvId.MOUNTAINCAR_CONTINUOUS: EnvSpec(
        EnvId.MOUNTAINCAR_CONTINUOUS, 2, False, 1, (-1.0,), (1.0,), max_steps=999
    ),
    EnvId.PENDULUM: EnvSpec(EnvId.PENDULUM, 3, False, 1, (-2.0,), (2.0,), max_steps=200),
    EnvId.ACROBOT: EnvSpec(EnvId.ACROBOT, 6, True, 3, max_steps=500),
}


def get_spec(env) -> EnvSpec:
    """Look up a spec by :class:`EnvId`, integer code or task name."""
    if isinstance(env, EnvSpec):
        return env
    if isinstance(env, str):
        for env_id, name in _NAMES.items():
            if name.lower() == env.lower():
                return SPECS[env_id]
        raise KeyError(f"unknown environment {env!r}")
    return SPECS[EnvId(env)]


# ---------------------------------------------------------------------------
# constants

CP_GRAVITY = 9.8
CP_MASSCART = 1.0
CP_MASSPOLE = 0.1
CP_TOTAL_MASS = CP_MASSCART + CP_MASSPOLE
CP_LENGTH = 0.5
CP_POLEMASS_LENGTH = CP_MASSPOLE * CP_LENGTH
CP_FORCE_MAG = 10.0
CP_TAU = 0.02
CP_THETA_THRESHOLD = 12 * 2 * math.pi / 360
CP_X_THRESHOLD = 2.4

MC_MIN_POSITION = -1.2
MC_MAX_POSITION = 0.6
MC_MAX_SPEED = 0.07
MC_GOAL_POSITION = 0.5
MC_FORCE = 0.001
MC_GRAVITY = 0.0025

MCC_GOAL_POSITION = 0.45
MCC_POWER = 0.0015

PD_MAX_SPEED = 8.0
PD_MAX_TORQUE = 2.0
PD_DT = 0.05
PD_G = 10.0
PD_M = 1.0
PD_L = 1.0

AB_DT = 0.2
AB_LINK_LENGTH_1 = 1.0
AB_LINK_MASS_1 = 1.0
AB_LINK_MASS_2 = 1.0
AB_LINK_COM_POS_1 = 0.5
AB_LINK_COM_POS_2 = 0.5
AB_LINK_MOI = 1.0
AB_G = 9.8
AB_MAX_VEL_1 = 4 * math.pi
AB_MAX_VEL_2 = 9 * math.pi

_PHYS_DIM = (4, 2, 2, 2, 4)
_OBS_DIM = (4, 2, 2, 3, 6)


# ---------------------------------------------------------------------------
# compiled kernels


@njit(cache=True, nogil=True)
def _clip(x, lo, hi):
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


@njit(cache=True, nogil=True)
def _wrap(x, m, big_m):
    diff = big_m - m
    while x > big_m:
        x = x - diff
    while x < m:
        x = x + diff
    return x


@njit(cache=True, nogil=True)
def _cartpole_step(s, a):
    x, x_dot, theta, theta_dot = s[0], s[1], s[2], s[3]
    force = CP_FORCE_MAG if a[0] == 1.0 else -CP_FORCE_MAG
    costheta = math.cos(theta)
    sintheta = math.sin(theta)
    temp = (force + CP_POLEMASS_LENGTH * theta_dot * theta_dot * sintheta) / CP_TOTAL_MASS
    thetaacc = (CP_GRAVITY * sintheta - costheta * temp) / (
        CP_LENGTH * (4.0 / 3.0 - CP_MASSPOLE * costheta * costheta / CP_TOTAL_MASS)
    )
    xacc = temp - CP_POLEMASS_LENGTH * thetaacc * costheta / CP_TOTAL_MASS
    s[0] = x + CP_TAU * x_dot
    s[1] = x_dot + CP_TAU * xacc
    s[2] = theta + CP_TAU * theta_dot
    s[3] = theta_dot + CP_TAU * thetaacc
    terminated = (
        s[0] < -CP_X_THRESHOLD
        or s[0] > CP_X_THRESHOLD
        or s[2] < -CP_THETA_THRESHOLD
        or s[2] > CP_THETA_THRESHOLD
    )
    return 1.0, terminated


@njit(cache=True, nogil=True)
def _mountaincar_step(s, a):
    position, velocity = s[0], s[1]
    velocity += (a[0] - 1.0) * MC_FORCE + math.cos(3.0 * position) * (-MC_GRAVITY)
    velocity = _clip(velocity, -MC_MAX_SPEED, MC_MAX_SPEED)
    position += velocity
    position = _clip(position, MC_MIN_POSITION, MC_MAX_POSITION)
    if position == MC_MIN_POSITION and velocity < 0.0:
        velocity = 0.0
    s[0] = position
    s[1] = velocity
    return -1.0, position >= MC_GOAL_POSITION and velocity >= 0.0


@njit(cache=True, nogil=True)
def _mountaincar_continuous_step(s, a):
    position, velocity = s[0], s[1]
    force = _clip(a[0], -1.0, 1.0)
    velocity += force * MCC_POWER - MC_GRAVITY * math.cos(3.0 * position)
    velocity = _clip(velocity, -MC_MAX_SPEED, MC_MAX_SPEED)
    position += velocity
    position = _clip(position, MC_MIN_POSITION, MC_MAX_POSITION)
    if position == MC_MIN_POSITION and velocity < 0.0:
        velocity = 0.0
    s[0] = position
    s[1] = velocity
    terminated = position >= MCC_GOAL_POSITION and velocity >= 0.0
    reward = 100.0 if terminated else 0.0
    reward -= a[0] * a[0] * 0.1
    return reward, terminated


@njit(cache=True, nogil=True)
def _angle_normalize(x):
    return ((x + math.pi) % (2.0 * math.pi)) - math.pi


@njit(cache=True, nogil=True)
def _pendulum_step(s, a):
    th, thdot = s[0], s[1]
    u = _clip(a[0], -PD_MAX_TORQUE, PD_MAX_TORQUE)
    thn = _angle_normalize(th)
    costs = thn * thn + 0.1 * thdot * thdot + 0.001 * u * u
    newthdot = thdot + (3.0 * PD_G / (2.0 * PD_L) * math.sin(th) + 3.0 / (PD_M * PD_L * PD_L) * u) * PD_DT
    newthdot = _clip(newthdot, -PD_MAX_SPEED, PD_MAX_SPEED)
    s[0] = th + newthdot * PD_DT
    s[1] = newthdot
    return -costs, False


@njit(cache=True, nogil=True)
def _acrobot_derivs(y, torque, out):
    m1 = AB_LINK_MASS_1
    m2 = AB_LINK_MASS_2
    l1 = AB_LINK_LENGTH_1
    lc1 = AB_LINK_COM_POS_1
    lc2 = AB_LINK_COM_POS_2
    i1 = AB_LINK_MOI
    i2 = AB_LINK_MOI
    g = AB_G
    theta1, theta2, dtheta1, dtheta2 = y[0], y[1], y[2], y[3]
    d1 = m1 * lc1**2 + m2 * (l1**2 + lc2**2 + 2.0 * l1 * lc2 * math.cos(theta2)) + i1 + i2
    d2 = m2 * (lc2**2 + l1 * lc2 * math.cos(theta2)) + i2
    phi2 = m2 * lc2 * g * math.cos(theta1 + theta2 - math.pi / 2.0)
    phi1 = (
        -m2 * l1 * lc2 * dtheta2**2 * math.sin(theta2)
        - 2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * math.sin(theta2)
        + (m1 * lc1 + m2 * l1) * g * math.cos(theta1 - math.pi / 2.0)
        + phi2
    )
    ddtheta2 = (
        torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1**2 * math.sin(theta2) - phi2
    ) / (m2 * lc2**2 + i2 - d2**2 / d1)
    ddtheta1 = -(d2 * ddtheta2 + phi1) / d1
    out[0] = dtheta1
    out[1] = dtheta2
    out[2] = ddtheta1
    out[3] = ddtheta2


@njit(cache=True, nogil=True)
def _acrobot_step(s, a):
    torque = a[0] - 1.0
    dt = AB_DT
    dt2 = dt / 2.0
    k1 = np.empty(4)
    k2 = np.empty(4)
    k3 = np.empty(4)
    k4 = np.empty(4)
    tmp = np.empty(4)
    _acrobot_derivs(s, torque, k1)
    for i in range(4):
        tmp[i] = s[i] + dt2 * k1[i]
    _acrobot_derivs(tmp, torque, k2)
    for i in range(4):
        tmp[i] = s[i] + dt2 * k2[i]
    _acrobot_derivs(tmp, torque, k3)
    for i in range(4):
        tmp[i] = s[i] + dt * k3[i]
    _acrobot_derivs(tmp, torque, k4)
    for i in range(4):
        tmp[i] = s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    s[0] = _wrap(tmp[0], -math.pi, math.pi)
    s[1] = _wrap(tmp[1], -math.pi, math.pi)
    s[2] = _clip(tmp[2], -AB_MAX_VEL_1, AB_MAX_VEL_1)
    s[3] = _clip(tmp[3], -AB_MAX_VEL_2, AB_MAX_VEL_2)
    terminated = -math.cos(s[0]) - math.cos(s[1] + s[0]) > 1.0
    return (0.0 if terminated else -1.0), terminated


@njit(cache=True, nogil=True)
def step_kernel(code, s, a):
    """Advance physics ``s`` in place under decoded action ``a``.

    Returns ``(reward, terminated)``.
    """
    if code == 0:
        return _cartpole_step(s, a)
    elif code == 1:
        return _mountaincar_step(s, a)
    elif code == 2:
        return _mountaincar_continuous_step(s, a)
    elif code == 3:
        return _pendulum_step(s, a)
    return _acrobot_step(s, a)


@njit(cache=True, nogil=True)
def observe_kernel(code, s, out):
    if code == 3:
        out[0] = math.cos(s[0])
        out[1] = math.sin(s[0])
        out[2] = s[1]
    elif code == 4:
        out[0] = math.cos(s[0])
        out[1] = math.sin(s[0])
        out[2] = math.cos(s[1])
        out[3] = math.sin(s[1])
        out[4] = s[2]
        out[5] = s[3]
    else:
        for i in range(s.shape[0]):
            out[i] = s[i]


@njit(cache=True, nogil=True)
def decode_kernel(discrete, raw, low, high, out):
    """Clip/scale (continuous) or argmax with lowest-index ties (discrete)."""
    if discrete:
        best = 0
        for i in range(1, raw.shape[0]):
            if raw[i] > raw[best]:
                best = i
        out[0] = float(best)
    else:
        for i in range(raw.shape[0]):
            v = _clip(raw[i], 0.0, 1.0)
            out[i] = low[i] + v * (high[i] - low[i])


# ---------------------------------------------------------------------------
# Python-facing API


@dataclass
class EnvState:
    """One environment instance between steps.

    ``physics`` holds the raw state variables: CartPole (x, x_dot, theta,
    theta_dot); MountainCar variants (position, velocity); Pendulum (theta,
    theta_dot); Acrobot (theta1, theta2, dtheta1, dtheta2).
    """

    env_id: EnvId
    physics: np.ndarray
    step_counter: int = 0
    rng: np.random.Generator | None = field(default=None, repr=False, compare=False)
    done: bool = False


@dataclass(frozen=True)
class StepOutcome:
    observation: np.ndarray
    reward: float
    terminated: bool
    truncated: bool


def initial_physics(spec: EnvSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw the canonical initial state for ``spec`` from ``rng``."""
    env_id = spec.env_id
    if env_id == EnvId.CARTPOLE:
        return rng.uniform(-0.05, 0.05, size=4)
    if env_id in (EnvId.MOUNTAINCAR, EnvId.MOUNTAINCAR_CONTINUOUS):
        return np.array([rng.uniform(-0.6, -0.4), 0.0])
    if env_id == EnvId.PENDULUM:
        return rng.uniform(np.array([-math.pi, -1.0]), np.array([math.pi, 1.0]))
    return rng.uniform(-0.1, 0.1, size=4)


def observe(env_id: EnvId, physics: np.ndarray) -> np.ndarray:
    out = np.empty(_OBS_DIM[int(env_id)])
    observe_kernel(int(env_id), physics, out)
    return out


def env_reset(spec: EnvSpec, seed: int) -> tuple[EnvState, np.ndarray]:
    """Start a fresh episode whose initial state is fully determined by ``seed``."""
    rng = np.random.default_rng(int(seed))
    physics = initial_physics(spec, rng).astype(np.float64)
    state = EnvState(spec.env_id, physics, 0, rng)
    return state, observe(spec.env_id, physics)


def _as_action_array(spec: EnvSpec, action) -> np.ndarray:
    if spec.discrete:
        a = int(action)
        if not 0 <= a < spec.n_actions or a != action:
            raise ValueError(f"action {action!r} outside {spec.name} action set")
        return np.array([float(a)])
    a = np.asarray(action, dtype=np.float64).reshape(-1)
    if a.shape[0] != spec.n_actions:
        raise ValueError(f"expected {spec.n_actions} action values, got {a.shape[0]}")
    if not np.all(np.isfinite(a)) or np.any(a < spec.low) or np.any(a > spec.high):
        raise ValueError(f"action {a} outside bounds [{spec.low}, {spec.high}]")
    return a


def env_step(state: EnvState, action) -> tuple[EnvState, StepOutcome]:
    """Advance one step; returns a new state and the outcome.

    ``action`` must already be decoded (see :func:`action_decode`).
    """
    if state.done:
        raise RuntimeError("cannot step a finished episode; call env_reset")
    spec = SPECS[state.env_id]
    a = _as_action_array(spec, action)
    physics = state.physics.copy()
    reward, terminated = step_kernel(int(spec.env_id), physics, a)
    counter = state.step_counter + 1
    truncated = (not terminated) and counter >= spec.max_steps
    new_state = EnvState(spec.env_id, physics, counter, state.rng, bool(terminated or truncated))
    outcome = StepOutcome(observe(spec.env_id, physics), float(reward), bool(terminated), truncated)
    return new_state, outcome


def action_decode(spec: EnvSpec, raw_output):
    """Map raw network outputs to an environment action.

    Continuous tasks clip each output to [0, 1] and rescale it to
    [low, high]; discrete tasks take the argmax, ties going to the lowest
    index.
    """
    raw = np.asarray(raw_output, dtype=np.float64).reshape(-1)
    if raw.shape[0] != spec.n_actions:
        raise ValueError(f"expected {spec.n_actions} raw outputs, got {raw.shape[0]}")
    if not np.all(np.isfinite(raw)):
        raise ValueError("raw network output must be finite")
    out = np.empty(spec.action_dim)
    decode_kernel(spec.discrete, raw, np.array(spec.low, dtype=np.float64),
                  np.array(spec.high, dtype=np.float64), out)
    if spec.discrete:
        return int(out[0])
    return out


@dataclass(frozen=True)
class EpisodeTrace:
    """One full episode: ``observations`` has one more row than ``actions``.

    Observations are raw (un-standardized); discrete actions are stored as
    a one-column float array of indices.
    """

    env_id: EnvId
    observations: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    terminated: bool
    truncated: bool
    env_seed: int

    def __post_init__(self):
        n = self.rewards.shape[0]
        if self.actions.shape[0] != n or self.observations.shape[0] != n + 1:
            raise ValueError("trace requires len(actions) == len(rewards) == len(observations) - 1")

    def __len__(self) -> int:
        return int(self.rewards.shape[0])

    @property
    def episode_return(self) -> float:
        return float(np.sum(self.rewards))

    def replay(self) -> "EpisodeTrace":
        """Re-execute the stored actions from ``env_seed``."""
        spec = SPECS[self.env_id]
        state, obs = env_reset(spec, self.env_seed)
        observations = [obs]
        rewards = []
        terminated = truncated = False
        for a in self.actions:
            action = int(a[0]) if spec.discrete else a
            state, out = env_step(state, action)
            observations.append(out.observation)
            rewards.append(out.reward)
            terminated, truncated = out.terminated, out.truncated
        return EpisodeTrace(self.env_id, np.array(observations), self.actions.copy(),
                            np.array(rewards, dtype=np.float64), terminated, truncated,
                            self.env_seed)
