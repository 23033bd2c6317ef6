"""Control policies for closed-loop propagation.

A policy is any callable (t, state) -> raw control vector. The
propagator applies the system's clamping/normalization afterwards, so
policies return unconstrained outputs (a network's raw heads, or
interpolated samples).
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline, interp1d


class NetworkPolicy:
    """Feedback from a trained network; inputs pass through the training
    scaler before inference."""

    def __init__(self, network, scaler):
        self.network = network
        self.scaler = scaler

    def __call__(self, t, state):
        x = state if self.scaler is None else self.scaler.transform(state)
        return self.network.forward(x)


class SampledPlayback:
    """Open-loop replay of a sampled control sequence.

    Interpolates the stored samples in time (cubic by default, linear on
    request) and ignores the state argument entirely. Query times are
    clipped to the sampled range.
    """

    def __init__(self, times, controls, kind: str = "cubic"):
        times = np.asarray(times, dtype=np.float64)
        controls = np.asarray(controls, dtype=np.float64)
        if len(times) != len(controls):
            raise ValueError("times and controls are misaligned")
        self.t0 = float(times[0])
        self.t1 = float(times[-1])
        if kind == "cubic" and len(times) >= 4:
            self._interp = CubicSpline(times, controls, axis=0)
        else:
            self._interp = interp1d(times, controls, axis=0, kind="linear")

    def __call__(self, t, state):
        return self._interp(min(max(t, self.t0), self.t1))


class ConstantPolicy:
    def __init__(self, control):
        self.control = np.asarray(control, dtype=np.float64)

    def __call__(self, t, state):
        return self.control
