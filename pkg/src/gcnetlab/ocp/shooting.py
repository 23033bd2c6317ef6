"""Newton single shooting for the two-point boundary-value problems.

Unknowns are the initial costates plus the time of flight; residuals are
terminal boundary mismatches plus the free-time condition H(t_f) = 0
(and, for the landing, the free-final-mass condition lam_m(t_f) = 0).
The Jacobian is one-sided finite differences; steps are damped by a
halving line search.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConvergenceError
from . import _fast

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
RTOL = 1e-12
ATOL = 1e-12
# smoothing continuation stages; the final entry declares the solution
# bang-bang and switches to event-located integration
HOMOTOPY_SCHEDULE = (1.0, 0.5, 0.2, 0.1, 0.05, 0.01)
BANGBANG_SCHEDULE = HOMOTOPY_SCHEDULE + (0.0,)

_PROBLEM_CODES = {"transfer": _fast.TRANSFER, "landing": _fast.LANDING}


def pack_params(problem: str, params) -> np.ndarray:
    if problem == "transfer":
        return np.array([params.mu, params.spin, params.gamma])
    return np.array([params.mu, params.omega, params.c1, params.exhaust, 0.0])


@dataclass
class ShootingSolution:
    """A converged extremal: unknowns, residuals and a dense sampling."""

    problem: str
    x0: np.ndarray
    target: np.ndarray
    unknowns: np.ndarray
    residual: np.ndarray
    residual_norm: float
    iterations: int
    times: np.ndarray
    states: np.ndarray
    costates: np.ndarray
    controls: np.ndarray
    hamiltonians: np.ndarray
    eps_h: float = 0.0

    @property
    def tf(self) -> float:
        return float(self.unknowns[-1])


def integrate_augmented(problem: str, pars, y0, t_out, sign: float = 1.0):
    """Route to the event-aware driver for exact bang-bang landings."""
    y0 = np.asarray(y0, dtype=np.float64)
    t_out = np.asarray(t_out, dtype=np.float64)
    if problem == "landing" and pars[4] == 0.0:
        ys, status = _fast.integrate_landing_bangbang(y0, pars, t_out, RTOL, ATOL, sign)
    else:
        code = _PROBLEM_CODES[problem]
        ys, status = _fast.integrate_to(code, y0, pars, t_out, RTOL, ATOL, sign)
    return (ys, True) if status == _fast.OK else (ys, False)


TF_MAX = 200.0


def _terminal_residual(problem: str, pars, x0, target, z):
    """Boundary residual of the unknowns vector z; None when invalid."""
    tf = z[-1]
    if not np.all(np.isfinite(z)) or tf <= 0.0 or tf > TF_MAX:
        return None
    y0 = np.concatenate([x0, z[:-1]])
    ys, ok = integrate_augmented(problem, pars, y0, np.array([tf]))
    if not ok:
        return None
    yf = ys[-1]
    code = _PROBLEM_CODES[problem]
    h_f = _fast.hamiltonian(code, yf, pars)
    if problem == "transfer":
        res = np.empty(7)
        res[0:3] = yf[0:3] - target[0:3]
        res[3:6] = yf[3:6] - target[3:6]
        res[6] = h_f
    else:
        res = np.empty(8)
        res[0:3] = yf[0:3] - target[0:3]
        res[3:6] = yf[3:6] - target[3:6]
        res[6] = yf[13]  # free final mass
        res[7] = h_f
    if not np.all(np.isfinite(res)):
        return None
    return res


def fd_jacobian(residual_fn, z, f0, rel_step=1e-7):
    """One-sided finite-difference Jacobian columns."""
    n = len(z)
    jac = np.empty((len(f0), n))
    for j in range(n):
        h = rel_step * max(abs(z[j]), 1e-2)
        zp = z.copy()
        zp[j] += h
        fp = residual_fn(zp)
        if fp is None:
            zp[j] = z[j] - h
            fp = residual_fn(zp)
            if fp is None:
                raise ConvergenceError("residual not evaluable near the current iterate")
            h = -h
        jac[:, j] = (fp - f0) / h
    return jac


def newton(residual_fn, z0, tol=DEFAULT_TOL, max_iter=50, max_halvings=30):
    """Damped Newton iteration on a residual map.

    Returns (z, residual, converged, iterations). The best iterate seen
    is returned even on failure.
    """
    z = np.asarray(z0, dtype=np.float64).copy()
    f = residual_fn(z)
    if f is None:
        return z, None, False, 0
    best_z, best_f = z.copy(), f.copy()
    for it in range(1, max_iter + 1):
        if np.max(np.abs(f)) < tol:
            return z, f, True, it - 1
        jac = fd_jacobian(residual_fn, z, f)
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(jac, -f, rcond=None)
        fnorm = np.linalg.norm(f)
        alpha = 1.0
        accepted = False
        for _ in range(max_halvings):
            z_try = z + alpha * step
            f_try = residual_fn(z_try)
            if f_try is not None and np.linalg.norm(f_try) < fnorm:
                z, f = z_try, f_try
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            return best_z, best_f, False, it
        if np.linalg.norm(f) < np.linalg.norm(best_f):
            best_z, best_f = z.copy(), f.copy()
    converged = np.max(np.abs(f)) < tol
    return z, f, converged, max_iter


def sample_extremal(problem: str, pars, x0, z, n_samples: int):
    """Evaluate a converged extremal at equally spaced times."""
    tf = z[-1]
    t_out = np.linspace(0.0, tf, n_samples)
    y0 = np.concatenate([x0, z[:-1]])
    ys, ok = integrate_augmented(problem, pars, y0, t_out)
    if not ok:
        raise ConvergenceError("sampling integration failed on a converged solution")
    code = _PROBLEM_CODES[problem]
    sd = 6 if problem == "transfer" else 7
    controls = np.array([_fast.control_of(code, y, pars) for y in ys])
    hams = np.array([_fast.hamiltonian(code, y, pars) for y in ys])
    return t_out, ys[:, :sd], ys[:, sd:], controls, hams


def _finalize(problem, pars, x0, target, z, f, iters, n_samples, eps_h=0.0):
    times, states, costates, controls, hams = sample_extremal(problem, pars, x0, z, n_samples)
    return ShootingSolution(
        problem=problem,
        x0=np.asarray(x0, dtype=np.float64).copy(),
        target=np.asarray(target, dtype=np.float64).copy(),
        unknowns=z.copy(),
        residual=f.copy(),
        residual_norm=float(np.max(np.abs(f))),
        iterations=iters,
        times=times,
        states=states,
        costates=costates,
        controls=controls,
        hamiltonians=hams,
        eps_h=eps_h,
    )


def _degenerate_solution(problem, x0, target, n_unknowns):
    # already at the target: tf = 0, arbitrary unit primer
    z = np.zeros(n_unknowns)
    z[3:6] = [0.0, 0.0, -1.0]
    control = np.array([1.0, 0.0, 0.0]) if problem == "transfer" else np.array([0.0, 1.0, 0.0, 0.0])
    return ShootingSolution(
        problem=problem,
        x0=np.asarray(x0, dtype=np.float64).copy(),
        target=np.asarray(target, dtype=np.float64).copy(),
        unknowns=z,
        residual=np.zeros(n_unknowns),
        residual_norm=0.0,
        iterations=0,
        times=np.zeros(1),
        states=np.asarray(x0, dtype=np.float64)[None, :].copy(),
        costates=z[None, :-1].copy(),
        controls=control[None, :],
        hamiltonians=np.zeros(1),
    )


def bootstrap_transfer_guess(x0, target, params):
    """Primer guess: thrust along the velocity deficit, ballistic tf."""
    dv = target[3:6] - x0[3:6]
    dr = target[0:3] - x0[0:3]
    ndv = np.linalg.norm(dv)
    lam_v_hat = -dv / ndv if ndv > 1e-12 else -dr / np.linalg.norm(dr)
    # scale so H(0) is roughly zero with lam_r = 0
    rn = np.linalg.norm(x0[0:3])
    a0 = np.empty(3)
    a0[0] = -params.mu * x0[0] / rn**3 + 2 * params.spin * x0[4] + params.spin**2 * x0[0]
    a0[1] = -params.mu * x0[1] / rn**3 - 2 * params.spin * x0[3] + params.spin**2 * x0[1]
    a0[2] = -params.mu * x0[2] / rn**3
    denom = params.gamma - lam_v_hat @ a0
    scale = 1.0 / denom if denom > 1e-9 else 1.0
    tf = 2.0 * np.sqrt(2.0 * np.linalg.norm(dr) / params.gamma) + ndv / params.gamma
    z = np.zeros(7)
    z[3:6] = scale * lam_v_hat
    z[6] = max(tf, 0.5)
    return z


def solve_transfer(x0, params, target=None, guess=None, tol=DEFAULT_TOL,
                   n_samples=100, seed=0, n_restarts=40) -> ShootingSolution:
    """Time-optimal rendezvous extremal by single shooting."""
    x0 = np.asarray(x0, dtype=np.float64)
    if target is None:
        target = np.array([params.radius, 0.0, 0.0, 0.0, 0.0, 0.0])
    target = np.asarray(target, dtype=np.float64)
    if np.max(np.abs(x0 - target)) < tol:
        return _degenerate_solution("transfer", x0, target, 7)
    pars = pack_params("transfer", params)

    def residual(z):
        return _terminal_residual("transfer", pars, x0, target, z)

    base = bootstrap_transfer_guess(x0, target, params) if guess is None else np.asarray(guess, dtype=np.float64)
    rng = np.random.default_rng(seed)
    attempt = base.copy()
    for trial in range(n_restarts + 1):
        z, f, converged, iters = newton(residual, attempt, tol=tol)
        if converged:
            return _finalize("transfer", pars, x0, target, z, f, iters, n_samples)
        logger.debug("transfer restart %d: best residual %s", trial,
                     None if f is None else np.max(np.abs(f)))
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        attempt = base.copy()
        attempt[0:3] = rng.normal(scale=0.2 * max(np.linalg.norm(base[3:6]), 0.1), size=3)
        attempt[3:6] = direction * np.linalg.norm(base[3:6]) * rng.uniform(0.3, 3.0)
        attempt[6] = base[6] * rng.uniform(0.5, 2.0)
    raise ConvergenceError(
        "transfer shooting failed after restarts",
        best_residual=None if f is None else float(np.max(np.abs(f))),
    )


def bootstrap_landing_guess(x0, target, params):
    dv = target[3:6] - x0[3:6]
    dr = target[0:3] - x0[0:3]
    ndv = np.linalg.norm(dv)
    lam_v_hat = -dv / ndv if ndv > 1e-12 else -dr / max(np.linalg.norm(dr), 1e-12)
    accel = params.c1 / x0[6]
    tf = 2.0 * np.sqrt(2.0 * max(np.linalg.norm(dr), 1e-6) / accel) + ndv / accel
    z = np.zeros(8)
    z[3:6] = lam_v_hat * x0[6] / 2.0  # |lam_v| ~ m/2 puts the switching function near zero
    z[6] = 0.1
    z[7] = max(tf, 0.5)
    return z


def solve_landing(x0, params, target, guess=None, tol=DEFAULT_TOL, n_samples=100,
                  seed=0, n_restarts=40, schedule=BANGBANG_SCHEDULE) -> ShootingSolution:
    """Mass-optimal landing extremal via smoothing continuation.

    Solves at the first (most smoothed) stage with restarts, then walks
    the schedule down, warm starting each stage. The final stage is the
    bang-bang solution.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if np.max(np.abs(x0[:6] - target[:6])) < tol:
        return _degenerate_solution("landing", x0, target, 8)
    base_pars = pack_params("landing", params)

    def residual_at(eps_h):
        pars = base_pars.copy()
        pars[4] = eps_h
        return pars, (lambda z: _terminal_residual("landing", pars, x0, target, z))

    rng = np.random.default_rng(seed)
    base = bootstrap_landing_guess(x0, target, params) if guess is None else np.asarray(guess, dtype=np.float64)

    z = None
    for stage, eps_h in enumerate(schedule):
        pars, residual = residual_at(eps_h)
        # corner-crossing noise of the smoothed throttle's clamp points
        # floors the residual near 2e-10; only the event-located bang-bang
        # map supports the full tolerance
        stage_tol = tol if eps_h == 0.0 else max(tol, 1e-9)
        if stage == 0 and guess is None:
            attempt = base.copy()
            for trial in range(n_restarts + 1):
                z1, f, converged, iters = newton(residual, attempt, tol=stage_tol)
                if converged:
                    z = z1
                    break
                direction = rng.normal(size=3)
                direction /= np.linalg.norm(direction)
                attempt = base.copy()
                attempt[0:3] = rng.normal(scale=0.1, size=3)
                attempt[3:6] = direction * np.linalg.norm(base[3:6]) * rng.uniform(0.3, 3.0)
                attempt[6] = rng.uniform(0.01, 0.5)
                attempt[7] = base[7] * rng.uniform(0.5, 2.0)
            if z is None:
                raise ConvergenceError(
                    "landing homotopy failed at the first stage",
                    best_residual=None if f is None else float(np.max(np.abs(f))),
                    stage=0,
                )
        else:
            start = base if z is None else z
            z1, f, converged, iters = newton(residual, start, tol=stage_tol)
            if not converged:
                raise ConvergenceError(
                    f"landing homotopy stage {stage} (eps_h={eps_h}) did not converge",
                    best_residual=None if f is None else float(np.max(np.abs(f))),
                    stage=stage,
                )
            z = z1
        logger.debug("landing stage %d eps_h=%g tf=%g residual=%g",
                     stage, eps_h, z[-1], float(np.max(np.abs(f))))
    return _finalize("landing", pars, x0, target, z, f, iters, n_samples, eps_h=schedule[-1])


def reconstruct_control_table(problem: str, params, x0, unknowns, n_points: int):
    """Dense (times, controls) table re-derived from stored unknowns.

    Feeds open-loop playback at a resolution the 100-sample dataset
    cannot offer; the landing throttle ramps are steep enough that
    interpolating the coarse samples loses the switching structure.
    """
    pars = pack_params(problem, params)
    if problem == "landing":
        pars[4] = HOMOTOPY_SCHEDULE[-1]
    z = np.asarray(unknowns, dtype=np.float64)
    times, _, costates, controls, _ = sample_extremal(problem, pars, x0, z, n_points)
    return times, controls
