"""Rotating-frame dynamics for the two spacecraft problems.

Both share the structure: central gravity plus centrifugal and Coriolis
terms in the frame spin plane, plus a steerable thrust term. The landing
problem carries mass and a throttle; the transfer problem has constant
acceleration magnitude and no mass state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SingularStateError


@dataclass(frozen=True)
class LandingParams:
    """Asteroid landing constants (rotating frame pinned to the body)."""

    mu: float
    omega: float
    c1: float
    isp: float
    g0: float

    def __post_init__(self):
        if min(self.mu, self.omega, self.c1, self.isp, self.g0) <= 0:
            raise ValueError("all landing parameters must be strictly positive")

    @property
    def exhaust(self) -> float:
        return self.isp * self.g0


@dataclass(frozen=True)
class TransferParams:
    """Constant-acceleration transfer to a circular orbit of radius R."""

    mu: float
    radius: float
    gamma: float

    def __post_init__(self):
        if min(self.mu, self.radius, self.gamma) <= 0:
            raise ValueError("all transfer parameters must be strictly positive")

    @property
    def spin(self) -> float:
        # frame angular rate of the target circular orbit
        return float(np.sqrt(self.mu / self.radius**3))


def _rotating_accel(r, v, mu, spin):
    rn = np.linalg.norm(r)
    if rn == 0.0:
        raise SingularStateError("gravity singularity: r = 0")
    acc = -mu / rn**3 * r
    acc[0] += 2.0 * spin * v[1] + spin**2 * r[0]
    acc[1] += -2.0 * spin * v[0] + spin**2 * r[1]
    return acc


def landing_derivative(state, throttle, direction, params: LandingParams) -> np.ndarray:
    """7-state derivative: position, velocity, mass."""
    state = np.asarray(state, dtype=np.float64)
    r, v, m = state[0:3], state[3:6], state[6]
    if m <= 0.0:
        raise SingularStateError(f"non-positive mass {m!r}")
    t_hat = np.asarray(direction, dtype=np.float64)
    acc = _rotating_accel(r.copy(), v, params.mu, params.omega)
    acc += throttle * params.c1 / m * t_hat
    out = np.empty(7)
    out[0:3] = v
    out[3:6] = acc
    out[6] = -throttle * params.c1 / params.exhaust
    return out


def transfer_derivative(state, direction, params: TransferParams) -> np.ndarray:
    """6-state derivative under unit-vector steering."""
    state = np.asarray(state, dtype=np.float64)
    r, v = state[0:3], state[3:6]
    t_hat = np.asarray(direction, dtype=np.float64)
    acc = _rotating_accel(r.copy(), v, params.mu, params.spin)
    acc += params.gamma * t_hat
    out = np.empty(6)
    out[0:3] = v
    out[3:6] = acc
    return out


def rotating_energy(state, mu, spin) -> float:
    """Jacobi-like constant 0.5|v|^2 - 0.5 spin^2 (x^2+y^2) - mu/r.

    Conserved along unthrusted motion in the rotating frame.
    """
    state = np.asarray(state, dtype=np.float64)
    r, v = state[0:3], state[3:6]
    rn = np.linalg.norm(r)
    return 0.5 * np.dot(v, v) - 0.5 * spin**2 * (r[0] ** 2 + r[1] ** 2) - mu / rn


def normalize_direction(raw):
    vec = np.asarray(raw, dtype=np.float64)
    n = np.linalg.norm(vec)
    if n == 0.0:
        raise SingularStateError("zero-norm thrust direction")
    return vec / n


class LandingSystem:
    """Propagation adapter: control = (throttle, direction)."""

    problem = "landing"
    state_dim = 7
    control_dim = 4

    def __init__(self, params: LandingParams, target=None):
        self.params = params
        self.target = None if target is None else np.asarray(target, dtype=np.float64)

    def prepare_control(self, raw):
        raw = np.asarray(raw, dtype=np.float64)
        out = np.empty(4)
        out[0] = min(max(raw[0], 0.0), 1.0)
        out[1:] = normalize_direction(raw[1:])
        return out

    def derivative(self, state, control):
        return landing_derivative(state, control[0], control[1:], self.params)


class TransferSystem:
    """Propagation adapter: control = thrust direction."""

    problem = "transfer"
    state_dim = 6
    control_dim = 3

    def __init__(self, params: TransferParams, target=None):
        self.params = params
        if target is None:
            target = np.array([params.radius, 0.0, 0.0, 0.0, 0.0, 0.0])
        self.target = np.asarray(target, dtype=np.float64)

    def prepare_control(self, raw):
        return normalize_direction(raw)

    def derivative(self, state, control):
        return transfer_derivative(state, control, self.params)
