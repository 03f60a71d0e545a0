"""Independent reference implementations used as test oracles.

Written directly from the textbook equations, in plain Python/numpy, sharing
no code with the package.
"""

import math

import mpmath
import numpy as np

# ---------------------------------------------------------------------------
# physics


def cartpole(state, action):
    x, v, th, w = state
    g, mc, mp, l, f_mag, tau = 9.8, 1.0, 0.1, 0.5, 10.0, 0.02
    f = f_mag if action == 1 else -f_mag
    m = mc + mp
    # pole angular acceleration (Florian 2007, frictionless form)
    num = g * math.sin(th) + math.cos(th) * (-f - mp * l * w**2 * math.sin(th)) / m
    den = l * (4.0 / 3.0 - mp * math.cos(th) ** 2 / m)
    th_acc = num / den
    x_acc = (f + mp * l * (w**2 * math.sin(th) - th_acc * math.cos(th))) / m
    nxt = (x + tau * v, v + tau * x_acc, th + tau * w, w + tau * th_acc)
    limit = 12 * 2 * math.pi / 360
    done = abs(nxt[0]) > 2.4 or abs(nxt[2]) > limit
    return nxt, 1.0, done


def _track(position, velocity, accel, goal):
    velocity = min(max(velocity + accel, -0.07), 0.07)
    position = min(max(position + velocity, -1.2), 0.6)
    if position <= -1.2 and velocity < 0:
        velocity = 0.0
    return position, velocity, position >= goal and velocity >= 0


def mountaincar(state, action):
    p, v = state
    p, v, done = _track(p, v, 0.001 * (action - 1) - 0.0025 * math.cos(3 * p), 0.5)
    return (p, v), -1.0, done


def mountaincar_continuous(state, action):
    p, v = state
    a = float(action[0])
    p, v, done = _track(p, v, 0.0015 * min(max(a, -1.0), 1.0) - 0.0025 * math.cos(3 * p), 0.45)
    return (p, v), (100.0 if done else 0.0) - 0.1 * a * a, done


def pendulum(state, action):
    th, w = state
    u = min(max(float(action[0]), -2.0), 2.0)
    wrapped = math.remainder(th, 2 * math.pi)
    if wrapped == math.pi:
        wrapped = -math.pi
    reward = -(wrapped**2 + 0.1 * w**2 + 0.001 * u**2)
    w_new = min(max(w + (15.0 * math.sin(th) + 3.0 * u) * 0.05, -8.0), 8.0)
    return (th + w_new * 0.05, w_new), reward, False


def _acrobot_accel(y, tau):
    t1, t2, w1, w2 = y
    m1 = m2 = 1.0
    l1 = 1.0
    c1 = c2 = 0.5
    i1 = i2 = 1.0
    g = 9.8
    # mass matrix and bias terms of the two-link arm, solved as a linear system
    d11 = m1 * c1**2 + m2 * (l1**2 + c2**2 + 2 * l1 * c2 * math.cos(t2)) + i1 + i2
    d12 = m2 * (c2**2 + l1 * c2 * math.cos(t2)) + i2
    d22 = m2 * c2**2 + i2
    grav2 = m2 * c2 * g * math.sin(t1 + t2)
    h1 = (
        -m2 * l1 * c2 * w2**2 * math.sin(t2)
        - 2 * m2 * l1 * c2 * w2 * w1 * math.sin(t2)
        + (m1 * c1 + m2 * l1) * g * math.sin(t1)
        + grav2
    )
    h2 = m2 * l1 * c2 * w1**2 * math.sin(t2) + grav2
    acc = np.linalg.solve(np.array([[d11, d12], [d12, d22]]), np.array([-h1, tau - h2]))
    return np.array([w1, w2, acc[0], acc[1]])


def acrobot(state, action):
    tau = float(action - 1)
    y = np.array(state, dtype=float)
    dt = 0.2
    k1 = _acrobot_accel(y, tau)
    k2 = _acrobot_accel(y + dt / 2 * k1, tau)
    k3 = _acrobot_accel(y + dt / 2 * k2, tau)
    k4 = _acrobot_accel(y + dt * k3, tau)
    y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    def wrap(a):
        return (a + math.pi) % (2 * math.pi) - math.pi

    nxt = (wrap(y[0]), wrap(y[1]), min(max(y[2], -4 * math.pi), 4 * math.pi),
           min(max(y[3], -9 * math.pi), 9 * math.pi))
    done = -math.cos(nxt[0]) - math.cos(nxt[0] + nxt[1]) > 1.0
    return nxt, (0.0 if done else -1.0), done


PHYSICS = {
    "CartPole": cartpole,
    "MountainCar": mountaincar,
    "MountainCarContinuous": mountaincar_continuous,
    "Pendulum": pendulum,
    "Acrobot": acrobot,
}


def random_transition(name, rng):
    """A random (physical state, decoded action) pair inside the task's domain."""
    if name == "CartPole":
        s = rng.uniform([-2.4, -3, -0.2, -3], [2.4, 3, 0.2, 3])
        return s, int(rng.integers(2))
    if name == "MountainCar":
        return rng.uniform([-1.2, -0.07], [0.6, 0.07]), int(rng.integers(3))
    if name == "MountainCarContinuous":
        return rng.uniform([-1.2, -0.07], [0.6, 0.07]), rng.uniform(-1, 1, size=1)
    if name == "Pendulum":
        return rng.uniform([-math.pi, -8], [math.pi, 8]), rng.uniform(-2, 2, size=1)
    s = rng.uniform([-math.pi, -math.pi, -4 * math.pi, -9 * math.pi],
                    [math.pi, math.pi, 4 * math.pi, 9 * math.pi])
    return s, int(rng.integers(3))


# ---------------------------------------------------------------------------
# network


def mp_forward(sizes, rec, params, inputs, dps=50):
    """Arbitrary-precision forward pass over an input sequence.

    Returns the list of outputs (as mpf lists) for each step.
    """
    with mpmath.workdps(dps):
        p = [mpmath.mpf(float(v)) for v in params]
        h = [mpmath.mpf(0)] * sizes[rec + 1]
        outputs = []
        for x in inputs:
            cur = [mpmath.mpf(float(v)) for v in x]
            k = 0
            for layer in range(len(sizes) - 1):
                n_in, n_out = sizes[layer], sizes[layer + 1]
                w = [p[k + j * n_in: k + (j + 1) * n_in] for j in range(n_out)]
                k += n_in * n_out
                if layer == rec:
                    u = [p[k + j * n_out: k + (j + 1) * n_out] for j in range(n_out)]
                    k += n_out * n_out
                b = p[k: k + n_out]
                k += n_out
                z = [mpmath.fsum(wi * xi for wi, xi in zip(w[j], cur)) + b[j] for j in range(n_out)]
                if layer == rec:
                    z = [z[j] + mpmath.fsum(ui * hi for ui, hi in zip(u[j], h)) for j in range(n_out)]
                    cur = [mpmath.tanh(v) for v in z]
                    h = cur
                else:
                    cur = [v if v > 0 else mpmath.mpf(0) for v in z]
            outputs.append(cur)
        return outputs
