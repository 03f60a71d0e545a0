import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gane.envs import (
    EnvId,
    EnvState,
    EpisodeTrace,
    SPECS,
    action_decode,
    env_reset,
    env_step,
    get_spec,
    observe,
)
from conftest import ENV_NAMES
from oracles import PHYSICS, random_transition


def _state(name, physics):
    spec = get_spec(name)
    return EnvState(spec.env_id, np.array(physics, dtype=float))


def _decoded(name, action):
    return action if get_spec(name).discrete else np.asarray(action, dtype=float)


def test_spec_dimensions():
    dims = {"CartPole": 4, "MountainCar": 2, "MountainCarContinuous": 2, "Pendulum": 3, "Acrobot": 6}
    horizons = {"CartPole": 500, "MountainCar": 200, "MountainCarContinuous": 999, "Pendulum": 200,
                "Acrobot": 500}
    for name, d in dims.items():
        spec = get_spec(name)
        assert spec.obs_dim == d and spec.max_steps == horizons[name]
        _, obs = env_reset(spec, 3)
        assert obs.shape == (d,)


def test_cartpole_reset_range():
    spec = get_spec("CartPole")
    obs = np.array([env_reset(spec, s)[1] for s in range(10_000)])
    assert obs.min() >= -0.05 and obs.max() <= 0.05


@pytest.mark.parametrize("name", ENV_NAMES)
def test_reset_deterministic(name):
    spec = get_spec(name)
    a, b = env_reset(spec, 1234)[1], env_reset(spec, 1234)[1]
    assert a.tobytes() == b.tobytes()
    assert env_reset(spec, 1235)[1].tobytes() != a.tobytes()


def test_pendulum_observation_on_unit_circle():
    spec = get_spec("Pendulum")
    for seed in range(200):
        c, s, _ = env_reset(spec, seed)[1]
        assert abs(c * c + s * s - 1.0) < 1e-12


def test_cartpole_push_right_from_rest_matches_hand_computation():
    state = _state("CartPole", [0.0, 0.0, 0.0, 0.0])
    _, out = env_step(state, 1)
    # temp = 100/11, theta_acc = -600/41, x_acc = 4400/451, tau = 1/50
    expected = [0.0, float(Fraction(4400, 451) / 50), 0.0, float(Fraction(-600, 41) / 50)]
    assert np.max(np.abs(out.observation - expected)) < 1e-12
    assert out.reward == 1.0 and not out.terminated


def test_pendulum_upright_equilibrium():
    state = _state("Pendulum", [0.0, 0.0])
    new, out = env_step(state, np.array([0.0]))
    assert out.reward == 0.0
    assert abs(new.physics[0]) < 1e-12 and abs(new.physics[1]) < 1e-12


def test_mountaincar_goal_terminates():
    state = _state("MountainCar", [0.49, 0.05])
    _, out = env_step(state, 2)
    assert out.terminated and out.reward == -1.0


def test_mountaincar_continuous_goal_reward():
    _, out = env_step(_state("MountainCarContinuous", [0.44, 0.05]), np.array([1.0]))
    assert out.terminated and out.reward == pytest.approx(100.0 - 0.1)


@pytest.mark.parametrize("name", ENV_NAMES)
def test_physics_matches_oracle(name):
    rng = np.random.default_rng(ENV_NAMES.index(name))
    spec = get_spec(name)
    oracle = PHYSICS[name]
    for _ in range(2000):
        s, a = random_transition(name, rng)
        new, out = env_step(EnvState(spec.env_id, s.copy()), _decoded(name, a))
        ref_s, ref_r, ref_done = oracle(tuple(s), a)
        assert np.max(np.abs(new.physics - np.array(ref_s))) < 1e-9
        assert abs(out.reward - ref_r) < 1e-9
        assert out.terminated == ref_done


def test_stepping_finished_episode_is_an_error():
    spec = get_spec("MountainCar")
    state, _ = env_reset(spec, 0)
    while True:
        state, out = env_step(state, 1)
        if out.terminated or out.truncated:
            break
    assert out.truncated and state.step_counter == 200
    with pytest.raises(RuntimeError):
        env_step(state, 1)


@pytest.mark.parametrize("name,action", [
    ("CartPole", 2), ("CartPole", 0.5), ("MountainCar", -1),
    ("Pendulum", np.array([2.5])), ("MountainCarContinuous", np.array([0.1, 0.2])),
])
def test_out_of_bounds_action_rejected(name, action):
    state, _ = env_reset(get_spec(name), 0)
    with pytest.raises(ValueError):
        env_step(state, action)


@pytest.mark.parametrize("name", ENV_NAMES)
def test_episode_determinism_and_horizon(name):
    spec = get_spec(name)
    rng = np.random.default_rng(5)
    if spec.discrete:
        actions = [int(a) for a in rng.integers(spec.n_actions, size=spec.max_steps)]
    else:
        actions = [rng.uniform(spec.low, spec.high) for _ in range(spec.max_steps)]

    def play():
        state, obs = env_reset(spec, 77)
        seen = [obs.tobytes()]
        for a in actions:
            state, out = env_step(state, a)
            seen.append((out.observation.tobytes(), out.reward))
            if out.terminated or out.truncated:
                break
        return seen, state.step_counter

    first, n = play()
    assert play() == (first, n)
    assert n <= spec.max_steps


def test_cartpole_return_equals_length():
    spec = get_spec("CartPole")
    state, _ = env_reset(spec, 3)
    total = 0.0
    while True:
        state, out = env_step(state, 0)
        total += out.reward
        if out.terminated or out.truncated:
            break
    assert total == state.step_counter


def test_decode_continuous_scaling():
    assert action_decode(get_spec("Pendulum"), [0.5])[0] == 0.0
    assert action_decode(get_spec("MountainCarContinuous"), [1.7])[0] == 1.0
    assert action_decode(get_spec("MountainCarContinuous"), [0.0])[0] == -1.0


def test_decode_discrete_argmax_and_ties():
    spec = get_spec("Acrobot")
    assert action_decode(spec, [0.1, 0.7, 0.3]) == 1
    assert action_decode(get_spec("CartPole"), [0.0, 0.0]) == 0
    assert action_decode(spec, [0.2, 0.5, 0.5]) == 1


def test_decode_rejects_bad_input():
    with pytest.raises(ValueError):
        action_decode(get_spec("CartPole"), [0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        action_decode(get_spec("Pendulum"), [np.nan])


@settings(max_examples=100, deadline=None)
@given(a=st.floats(-5, 5), b=st.floats(-5, 5))
def test_decode_continuous_monotone_and_idempotent(a, b):
    spec = get_spec("Pendulum")
    lo, hi = sorted((a, b))
    assert action_decode(spec, [lo])[0] <= action_decode(spec, [hi])[0]
    clipped = min(max(a, 0.0), 1.0)
    assert action_decode(spec, [clipped])[0] == action_decode(spec, [a])[0]


def test_trace_replay_reproduces_rewards():
    spec = get_spec("Acrobot")
    rng = np.random.default_rng(0)
    state, obs = env_reset(spec, 11)
    observations, actions, rewards = [obs], [], []
    for _ in range(60):
        a = int(rng.integers(3))
        state, out = env_step(state, a)
        observations.append(out.observation)
        actions.append([float(a)])
        rewards.append(out.reward)
    trace = EpisodeTrace(spec.env_id, np.array(observations), np.array(actions), np.array(rewards),
                         False, False, 11)
    again = trace.replay()
    assert again.rewards.tobytes() == trace.rewards.tobytes()
    assert again.observations.tobytes() == trace.observations.tobytes()


def test_acrobot_angles_wrapped(rng):
    spec = get_spec("Acrobot")
    for _ in range(500):
        s, a = random_transition("Acrobot", rng)
        new, _ = env_step(EnvState(spec.env_id, s), a)
        assert -math.pi <= new.physics[0] <= math.pi and -math.pi <= new.physics[1] <= math.pi


def test_observe_encoding():
    obs = observe(EnvId.ACROBOT, np.array([0.3, -0.2, 1.0, 2.0]))
    assert np.allclose(obs, [math.cos(0.3), math.sin(0.3), math.cos(-0.2), math.sin(-0.2), 1.0, 2.0])


def test_get_spec_lookup():
    assert get_spec("cartpole") is SPECS[EnvId.CARTPOLE]
    assert get_spec(4) is SPECS[EnvId.ACROBOT]
    with pytest.raises(KeyError):
        get_spec("LunarLanderContinuous")
