"""Scenario construction by backward integration from the target.

Terminal costates are chosen to satisfy the transversality conditions
exactly (H = 0 at the final time; lam_m = 0 for the landing), then the
augmented system is integrated backward for a chosen flight time. The
endpoint becomes the scenario's initial state, and the backward
trajectory's initial costates are an essentially exact warm start for
the forward shooting solver. Desk configurations shipped with the
package were produced this way.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConvergenceError
from . import _fast
from .shooting import HOMOTOPY_SCHEDULE, integrate_augmented, pack_params


def _backward(problem, y_tf, pars, duration):
    ys, ok = integrate_augmented(problem, pars, y_tf, np.array([float(duration)]), sign=-1.0)
    if not ok:
        raise ConvergenceError("backward integration failed")
    return ys[-1]


def design_transfer_scenario(params, duration: float, seed: int, lam_r_scale: float = 0.2):
    """Build (x0, warm-start unknowns) for a rendezvous of the given
    flight time ending exactly at the target.

    At the target (an equilibrium of the rotating frame with zero
    velocity) the free-time condition fixes the terminal primer
    magnitude to 1/gamma; its direction and the terminal position
    costate are sampled from the seed.
    """
    rng = np.random.default_rng(seed)
    pars = pack_params("transfer", params)
    target = np.array([params.radius, 0.0, 0.0, 0.0, 0.0, 0.0])
    lam_v = rng.normal(size=3)
    lam_v *= 1.0 / (params.gamma * np.linalg.norm(lam_v))
    lam_r = lam_r_scale * rng.normal(size=3)
    y_tf = np.concatenate([target, lam_r, lam_v])
    y0 = _backward("transfer", y_tf, pars, duration)
    x0 = y0[:6].copy()
    unknowns = np.concatenate([y0[6:], [duration]])
    return x0, unknowns, target


def design_landing_scenario(params, duration: float, target_r, seed: int,
                            m0: float = 1.0, lam_r_scale: float = 0.3,
                            eps_h: float = HOMOTOPY_SCHEDULE[-1],
                            primer_alignment=(0.03, 0.2)):
    """Build (x0, warm-start unknowns) for a powered descent reaching
    rest at ``target_r`` with initial mass exactly ``m0``.

    The arc ends under full throttle: the terminal primer is sized so
    H(t_f) = 0 with the switching function strictly negative, its
    alignment with the local drift acceleration drawn from
    ``primer_alignment`` (fractions of c1/m). The terminal mass is
    found by a secant iteration so the backward arc starts at m0.
    """
    rng = np.random.default_rng(seed)
    pars = pack_params("landing", params)
    pars[4] = eps_h
    target_r = np.asarray(target_r, dtype=np.float64)
    target = np.concatenate([target_r, np.zeros(3)])

    rn = np.linalg.norm(target_r)
    a0 = -params.mu / rn**3 * target_r
    a0[0] += params.omega**2 * target_r[0]
    a0[1] += params.omega**2 * target_r[1]
    na0 = np.linalg.norm(a0)
    if na0 < 1e-12:
        raise ValueError("target sits at a rotating-frame equilibrium; pick another radius")
    a_hat = a0 / na0
    # random unit vector orthogonal to the drift acceleration
    e = rng.normal(size=3)
    e -= (e @ a_hat) * a_hat
    e /= np.linalg.norm(e)
    frac = rng.uniform(*primer_alignment)
    lam_r_tf = lam_r_scale * rng.normal(size=3)

    def backward_initial_mass(m_tf):
        q = frac * params.c1 / m_tf  # primer projection on the drift acceleration
        p = q / na0
        if not p < 1.0:
            raise ValueError("drift acceleration too weak for the requested alignment")
        l_hat = p * a_hat + np.sqrt(1.0 - p * p) * e
        s = params.c1 / (params.c1 / m_tf - q)
        lam_v_tf = s * l_hat
        y_tf = np.concatenate([target, [m_tf], lam_r_tf, lam_v_tf, [0.0]])
        return _backward("landing", y_tf, pars, duration), y_tf

    # secant iteration on the terminal mass
    m_lo = m0 * 0.5
    m_hi = m0
    y_lo, _ = backward_initial_mass(m_lo)
    y_hi, _ = backward_initial_mass(m_hi)
    f_lo, f_hi = y_lo[6] - m0, y_hi[6] - m0
    m_a, f_a, m_b, f_b = m_lo, f_lo, m_hi, f_hi
    y0 = y_hi
    for _ in range(60):
        if abs(f_b) < 1e-13 or f_b == f_a:
            break
        m_new = m_b - f_b * (m_b - m_a) / (f_b - f_a)
        m_new = min(max(m_new, 1e-3), m0)
        y0, y_tf = backward_initial_mass(m_new)
        m_a, f_a = m_b, f_b
        m_b, f_b = m_new, y0[6] - m0
    else:
        raise ConvergenceError("terminal-mass iteration did not converge")
    x0 = y0[:7].copy()
    unknowns = np.concatenate([y0[7:], [duration]])
    return x0, unknowns, target
