"""Open-loop playback of a stored extremal's controls.

The dataset's per-trajectory solver unknowns allow re-deriving the
control signal at arbitrary resolution: the thrust direction is smooth
and interpolates cleanly, while the landing throttle is reconstructed
as an exact 0/1 signal with located switch times. Interpolating the
coarse 100-point throttle samples instead would smear every switch
across a sample interval and dominate the closed-loop error budget.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline

from . import _fast
from .shooting import HOMOTOPY_SCHEDULE, pack_params, sample_extremal


def landing_switching_series(params, x0, unknowns, n_grid: int):
    """Switching-function samples along an extremal."""
    pars = pack_params("landing", params)
    pars[4] = 0.0
    times, states, costates, controls, _ = sample_extremal(
        "landing", pars, np.asarray(x0, dtype=np.float64),
        np.asarray(unknowns, dtype=np.float64), n_grid)
    m = states[:, 6]
    lam_m = costates[:, 6]
    nv = np.linalg.norm(costates[:, 3:6], axis=1)
    sf = (1.0 - lam_m) / params.exhaust - nv / m
    return times, sf, controls


def landing_switch_times(params, x0, unknowns, n_grid: int = 4001):
    """Throttle switch times located from the switching function."""
    times, sf, _ = landing_switching_series(params, x0, unknowns, n_grid)
    spline = CubicSpline(times, sf)
    all_roots = spline.roots(extrapolate=False)
    roots = []
    sign = np.sign(sf)
    for i in np.nonzero(np.diff(sign) != 0)[0]:
        in_bracket = all_roots[(all_roots >= times[i]) & (all_roots <= times[i + 1])]
        roots.extend(float(r) for r in in_bracket)
    return np.unique(np.round(roots, 14))


class ExtremalPlayback:
    """(t, state) -> raw control replaying a stored solution open loop.

    For the landing the throttle is exact bang-bang between located
    switch times (exposed as ``breaks`` for the propagator) and the
    direction is a cubic spline of a dense reconstruction. For the
    transfer only the direction spline is needed.
    """

    def __init__(self, problem: str, params, x0, unknowns, n_grid: int = 4001):
        self.problem = problem
        x0 = np.asarray(x0, dtype=np.float64)
        unknowns = np.asarray(unknowns, dtype=np.float64)
        pars = pack_params(problem, params)
        if problem == "landing":
            pars[4] = 0.0
        times, _, _, controls, _ = sample_extremal(problem, pars, x0, unknowns, n_grid)
        self.t1 = float(times[-1])
        if problem == "landing":
            self.breaks = landing_switch_times(params, x0, unknowns, n_grid)
            self._direction = CubicSpline(times, controls[:, 1:], axis=0)
            # throttle value on each inter-switch interval, read off the grid
            edges = np.concatenate([[0.0], self.breaks, [self.t1]])
            mids = 0.5 * (edges[:-1] + edges[1:])
            idx = np.searchsorted(times, mids)
            self._edges = edges
            self._throttle = controls[np.clip(idx, 0, len(times) - 1), 0].round()
        else:
            self.breaks = np.array([])
            self._direction = CubicSpline(times, controls, axis=0)

    def __call__(self, t, state):
        t = min(max(t, 0.0), self.t1)
        direction = self._direction(t)
        if self.problem == "transfer":
            return direction
        k = np.searchsorted(self._edges, t, side="right") - 1
        k = min(max(k, 0), len(self._throttle) - 1)
        return np.concatenate([[self._throttle[k]], direction])
