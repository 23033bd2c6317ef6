"""Closed-loop evaluation: propagate trained policies from validation
initial conditions for the stored optimal flight time, then report the
terminal position and velocity errors."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .data import ScalingTransform, TrajectoryDataset
from .dynamics import NetworkPolicy, propagate_closed_loop
from .errors import GCNetError
from .network import Network
from .training import weights_digest

logger = logging.getLogger(__name__)


@dataclass
class EvalCase:
    index: int
    initial_state: np.ndarray
    tf: float
    target: np.ndarray

    def __post_init__(self):
        if not self.tf > 0:
            raise ValueError("evaluation case needs a positive flight time")


@dataclass
class EvalReport:
    label: str
    pos_err: np.ndarray
    vel_err: np.ndarray
    failed: np.ndarray
    metadata: dict = field(default_factory=dict)

    def _finite(self, arr):
        return arr[~self.failed]

    @property
    def n_cases(self):
        return len(self.pos_err)

    def aggregate(self):
        out = {}
        for name, arr in (("pos", self.pos_err), ("vel", self.vel_err)):
            ok = self._finite(arr)
            if len(ok) == 0:
                out[name] = dict(mean=np.inf, median=np.inf, p5=np.inf, p95=np.inf)
            else:
                out[name] = dict(
                    mean=float(np.mean(ok)),
                    median=float(np.median(ok)),
                    p5=float(np.percentile(ok, 5)),
                    p95=float(np.percentile(ok, 95)),
                )
        out["failures"] = int(np.sum(self.failed))
        return out

    def mean_errors(self):
        # failed propagations dominate orderings as infinite errors
        pos = np.where(self.failed, np.inf, self.pos_err)
        vel = np.where(self.failed, np.inf, self.vel_err)
        return float(np.mean(pos)), float(np.mean(vel))

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("case,pos_err,vel_err,failed\n")
            for i in range(self.n_cases):
                fh.write(f"{i},{float(self.pos_err[i])!r},{float(self.vel_err[i])!r},"
                         f"{int(self.failed[i])}\n")


def build_eval_cases(validation: TrajectoryDataset, n: int, target, seed: int = 0):
    """First samples of n distinct validation trajectories, with their
    stored flight times; selection is a seeded permutation."""
    if validation.n_trajectories < n:
        raise ValueError(
            f"requested {n} cases but the validation split has "
            f"{validation.n_trajectories} trajectories")
    order = np.random.default_rng(seed).permutation(validation.n_trajectories)[:n]
    target = np.asarray(target, dtype=np.float64)
    return [
        EvalCase(int(i), validation.states[i, 0].copy(), float(validation.tfs[i]), target)
        for i in order
    ]


def evaluate_policy(policy_for_case, system, cases, dt_divisor: int = 1000,
                    label: str = "policy", metadata=None) -> EvalReport:
    """Run closed-loop propagation per case; failures become report
    entries, never crashes."""
    pos_err = np.empty(len(cases))
    vel_err = np.empty(len(cases))
    failed = np.zeros(len(cases), dtype=bool)
    for k, case in enumerate(cases):
        try:
            policy, breaks = policy_for_case(case)
            traj = propagate_closed_loop(system, policy, case.initial_state, case.tf,
                                         dt=case.tf / dt_divisor, t_breaks=breaks)
            final = traj.final_state
            pos_err[k] = np.linalg.norm(final[0:3] - case.target[0:3])
            vel_err[k] = np.linalg.norm(final[3:6] - case.target[3:6])
        except GCNetError as exc:
            logger.warning("case %d failed: %s", case.index, exc)
            pos_err[k] = np.nan
            vel_err[k] = np.nan
            failed[k] = True
    return EvalReport(label, pos_err, vel_err, failed, metadata or {})


def evaluate(network: Network, scaler: ScalingTransform, system, cases,
             dt_divisor: int = 1000, label: str = None) -> EvalReport:
    """Closed-loop evaluation of a trained network."""
    label = label or network.spec.hidden_activation.kind
    digest_before = weights_digest(network)
    policy = NetworkPolicy(network, scaler)
    report = evaluate_policy(lambda case: (policy, None), system, cases,
                             dt_divisor=dt_divisor, label=label,
                             metadata={
                                 "activation": network.spec.hidden_activation.kind,
                                 "hidden": list(network.spec.hidden_widths),
                                 "weights_sha256": digest_before,
                             })
    assert weights_digest(network) == digest_before  # evaluation is read-only
    return report


def emit_report(reports, out_dir) -> list:
    """Write per-network CSVs, a comparison plot and a text summary.

    Returns the list of written paths.
    """
    if not reports:
        raise ValueError("no reports to emit")
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for rep in reports:
        path = os.path.join(out_dir, f"errors_{rep.label}.csv")
        rep.to_csv(path)
        written.append(path)
    from .plotting import plot_error_boxes

    svg = os.path.join(out_dir, "errors.svg")
    plot_error_boxes(reports, svg)
    written.append(svg)

    lines = []
    best_pos = min(reports, key=lambda r: r.mean_errors()[0])
    best_vel = min(reports, key=lambda r: r.mean_errors()[1])
    for rep in reports:
        agg = rep.aggregate()
        mp, mv = rep.mean_errors()
        lines.append(f"{rep.label}: mean pos {mp:.6e}  mean vel {mv:.6e}  "
                     f"median pos {agg['pos']['median']:.6e}  failures {agg['failures']}")
    lines.append(f"best mean position error: {best_pos.label}")
    lines.append(f"best mean velocity error: {best_vel.label}")
    summary = os.path.join(out_dir, "summary.txt")
    with open(summary, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    written.append(summary)
    return written
