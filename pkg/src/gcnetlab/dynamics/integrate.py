"""Fixed-step RK4 integration and closed-loop propagation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonFiniteError


def rk4_integrate(derivative_fn, x0, t0: float, tf: float, dt: float):
    """Classical Runge-Kutta on dx/dt = f(t, x).

    Returns (times, states) including both endpoints; the final step is
    shortened so the trajectory lands exactly on tf.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if tf < t0:
        raise ValueError("tf must be >= t0")
    x = np.array(x0, dtype=np.float64)
    times = [t0]
    states = [x.copy()]
    t = t0
    while t < tf - 1e-15 * max(1.0, abs(tf)):
        h = min(dt, tf - t)
        k1 = derivative_fn(t, x)
        k2 = derivative_fn(t + h / 2, x + h / 2 * k1)
        k3 = derivative_fn(t + h / 2, x + h / 2 * k2)
        k4 = derivative_fn(t + h, x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t + h
        if not np.all(np.isfinite(x)):
            raise NonFiniteError(f"non-finite state at t={t!r}")
        times.append(t)
        states.append(x.copy())
    times[-1] = tf if len(times) > 1 else t0
    return np.array(times), np.array(states)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray  # prepared controls sampled at the step times

    @property
    def final_state(self):
        return self.states[-1]


def propagate_closed_loop(system, policy, x0, tf: float, dt: float = None,
                          hold_dt: float = None, t_breaks=None) -> Trajectory:
    """Integrate a system under a feedback policy.

    The policy is queried at every integrator stage (continuous-feedback
    idealization) unless ``hold_dt`` is given, in which case its output
    is held constant between refresh times (zero-order hold). Controls
    pass through ``system.prepare_control`` before entering the
    dynamics; a non-finite policy output aborts.

    ``t_breaks`` lists times where the control is discontinuous
    (open-loop bang-bang playback): steps are shortened to land exactly
    on them, restoring full integrator accuracy across the jumps.
    """
    if dt is None:
        dt = tf / 1000.0 if tf > 0 else 1.0
    if dt <= 0:
        raise ValueError("dt must be positive")
    breaks = np.array([], dtype=np.float64) if t_breaks is None else np.sort(
        np.asarray(t_breaks, dtype=np.float64)
    )
    breaks = breaks[(breaks > 0.0) & (breaks < tf)]

    held = {"next": -np.inf, "value": None}

    def control_at(t, state):
        if hold_dt is not None and held["value"] is not None and t < held["next"] - 1e-12:
            return held["value"]
        raw = policy(t, state)
        if not np.all(np.isfinite(np.asarray(raw, dtype=np.float64))):
            raise NonFiniteError(f"non-finite policy output at t={t!r}")
        prepared = system.prepare_control(raw)
        if hold_dt is not None:
            held["value"] = prepared
            held["next"] = t + hold_dt
        return prepared

    def rhs(t, state):
        return system.derivative(state, control_at(t, state))

    x = np.array(x0, dtype=np.float64)
    t = 0.0
    times = [t]
    states = [x.copy()]
    controls = [control_at(t, x)]
    next_break = 0
    while t < tf - 1e-15 * max(1.0, abs(tf)):
        h = min(dt, tf - t)
        while next_break < len(breaks) and breaks[next_break] <= t + 1e-13 * max(1.0, tf):
            next_break += 1
        on_break = next_break < len(breaks) and t + h > breaks[next_break]
        if on_break:
            h = breaks[next_break] - t
        k1 = rhs(t, x)
        k2 = rhs(t + h / 2, x + h / 2 * k1)
        k3 = rhs(t + h / 2, x + h / 2 * k2)
        # a step ending on a break must see the pre-jump control at its
        # final stage; the jump belongs to the next step's first stage
        t4 = np.nextafter(t + h, t) if on_break else t + h
        k4 = rhs(t4, x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        # land on the break exactly: accumulation may stop one ulp short,
        # which would hold the pre-jump control for a whole extra stage
        t = breaks[next_break] if on_break else t + h
        if not np.all(np.isfinite(x)):
            raise NonFiniteError(f"non-finite state at t={t!r}")
        times.append(t)
        states.append(x.copy())
        controls.append(control_at(t, x))
    times[-1] = tf if len(times) > 1 else 0.0
    return Trajectory(np.array(times), np.array(states), np.array(controls))
