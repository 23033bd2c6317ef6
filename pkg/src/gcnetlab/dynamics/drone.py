"""Quadcopter rigid-body model: 16 states, 4 throttle inputs.

State layout: position (world), velocity (world), Euler angles
(roll, pitch, yaw), body rates, four propeller rates. Gravity points
along +z of the world frame. The thrust/drag force model and the moment
model act in the body frame; ``mass`` divides the body force so a unit
mass reproduces the plain v_dot = g + R(lambda) F form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import GimbalLockError

# state slices
P = slice(0, 3)
V = slice(3, 6)
EUL = slice(6, 9)
RATE = slice(9, 12)
PROP = slice(12, 16)

STATE_DIM = 16
CONTROL_DIM = 4


@dataclass(frozen=True)
class DroneParams:
    inertia: tuple[float, float, float]
    k_x: float
    k_y: float
    k_omega: float
    k_z: float
    k_h: float
    k_p: float
    k_pv: float
    k_q: float
    k_qv: float
    k_r1: float
    k_r2: float
    k_rr: float
    tau: float
    omega_min: float
    omega_max: float
    mass: float = 1.0
    g: float = 9.81
    m_ext: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if any(i <= 0 for i in self.inertia):
            raise ValueError("inertia diagonal must be positive")
        if self.tau <= 0:
            raise ValueError("motor time constant must be positive")
        if not self.omega_max > self.omega_min >= 0:
            raise ValueError("need omega_max > omega_min >= 0")
        if self.mass <= 0:
            raise ValueError("mass must be positive")


def rotation_body_to_world(lam) -> np.ndarray:
    """Euler-angle rotation taking body-frame vectors to the world frame."""
    phi, theta, psi = lam
    cph, sph = np.cos(phi), np.sin(phi)
    cth, sth = np.cos(theta), np.sin(theta)
    cps, sps = np.cos(psi), np.sin(psi)
    return np.array(
        [
            [cth * cps, -cph * sps + sph * sth * cps, sph * sps + cph * sth * cps],
            [cth * sps, cph * cps + sph * sth * sps, -sph * cps + cph * sth * sps],
            [-sth, sph * cth, cph * cth],
        ]
    )


def euler_rate_matrix(lam) -> np.ndarray:
    """Map body rates to Euler-angle rates; singular at pitch +-90 deg."""
    phi, theta, _ = lam
    cth = np.cos(theta)
    if abs(cth) < 1e-9:
        raise GimbalLockError(f"euler-rate matrix singular at theta={theta!r}")
    cph, sph = np.cos(phi), np.sin(phi)
    tth = np.tan(theta)
    return np.array(
        [
            [1.0, sph * tth, cph * tth],
            [0.0, cph, -sph],
            [0.0, sph / cth, cph / cth],
        ]
    )


def body_velocity(state) -> np.ndarray:
    return rotation_body_to_world(state[EUL]).T @ state[V]


def drone_forces(state, params: DroneParams) -> np.ndarray:
    """Body-frame thrust and drag force."""
    vb = body_velocity(state)
    w = state[PROP]
    sw = w.sum()
    fx = -params.k_x * vb[0] * sw
    fy = -params.k_y * vb[1] * sw
    fz = (
        -params.k_omega * np.sum(w**2)
        - params.k_z * vb[2] * sw
        - params.k_h * (vb[0] ** 2 + vb[1] ** 2)
    )
    return np.array([fx, fy, fz])


def drone_moments(state, omega_dot, params: DroneParams) -> np.ndarray:
    """Body-frame moment, including the propeller-acceleration yaw term."""
    vb = body_velocity(state)
    w = state[PROP]
    w2 = w**2
    r = state[RATE][2]
    mx = params.k_p * (w2[0] - w2[1] - w2[2] + w2[3]) + params.k_pv * vb[1]
    my = params.k_q * (w2[0] + w2[1] - w2[2] - w2[3]) + params.k_qv * vb[0]
    mz = (
        params.k_r1 * (-w[0] + w[1] - w[2] + w[3])
        + params.k_r2 * (-omega_dot[0] + omega_dot[1] - omega_dot[2] + omega_dot[3])
        - params.k_rr * r
    )
    return np.array([mx, my, mz])


def drone_derivative(state, control, params: DroneParams) -> np.ndarray:
    """Full 16-state time derivative for throttles in [0, 1]^4."""
    state = np.asarray(state, dtype=np.float64)
    u = np.asarray(control, dtype=np.float64)
    omega_dot = ((params.omega_max - params.omega_min) * u + params.omega_min - state[PROP]) / params.tau
    rot = rotation_body_to_world(state[EUL])
    force = drone_forces(state, params)
    moment = drone_moments(state, omega_dot, params)
    inertia = np.asarray(params.inertia)
    rate = state[RATE]
    out = np.empty(STATE_DIM)
    out[P] = state[V]
    out[V] = np.array([0.0, 0.0, params.g]) + rot @ force / params.mass
    out[EUL] = euler_rate_matrix(state[EUL]) @ rate
    out[RATE] = (-np.cross(rate, inertia * rate) + moment + np.asarray(params.m_ext)) / inertia
    out[PROP] = omega_dot
    return out


def drone_cost(times, controls, epsilon: float) -> float:
    """Flight-time / control-energy blend: (1-eps) T + eps * int ||u||^2 dt.

    The energy integral uses the trapezoidal rule on the sampled controls.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    times = np.asarray(times, dtype=np.float64)
    controls = np.asarray(controls, dtype=np.float64)
    if len(times) != len(controls):
        raise ValueError("times and control samples are misaligned")
    total_time = times[-1] - times[0]
    energy = np.trapezoid(np.sum(controls**2, axis=1), times)
    return (1.0 - epsilon) * total_time + epsilon * energy


class DroneSystem:
    """Propagation adapter for the quadcopter."""

    problem = "drone"
    state_dim = STATE_DIM
    control_dim = CONTROL_DIM

    def __init__(self, params: DroneParams):
        self.params = params

    def prepare_control(self, raw):
        return np.clip(np.asarray(raw, dtype=np.float64), 0.0, 1.0)

    def derivative(self, state, control):
        return drone_derivative(state, control, self.params)
