"""Trajectory-sample datasets: container format, scaling, splits, batches.

Binary container layout (little-endian):

    magic   4 bytes  b"GCDT"
    version u32      currently 1
    problem u8       0 drone, 1 landing, 2 transfer (3 bytes padding)
    state_dim u32, control_dim u32, samples_per_traj u32, n_traj u32,
    aux_dim u32
    records: n_traj * samples_per_traj rows of float64
        [traj_index, time, state..., control..., t_f], trajectory-major
    aux block: n_traj * aux_dim float64 (per-trajectory solver unknowns;
        aux_dim = 0 for ingested data)

The CSV sibling format is one record per row with a header line:
    traj,time,s0..s{S-1},c0..c{C-1},tf
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CorruptHeaderError,
    DimensionMismatchError,
    NonFiniteError,
    ProblemMismatchError,
    TruncatedDataError,
)

logger = logging.getLogger(__name__)

MAGIC = b"GCDT"
VERSION = 1

PROBLEMS = ("drone", "landing", "transfer")
PROBLEM_DIMS = {"drone": (16, 4), "landing": (7, 4), "transfer": (6, 3)}
_PROBLEM_CODES = {name: i for i, name in enumerate(PROBLEMS)}


@dataclass
class TrajectoryDataset:
    """Bundles of optimal state-control samples.

    ``states`` has shape (n_traj, samples, state_dim), ``controls``
    (n_traj, samples, control_dim), ``times`` (n_traj, samples),
    ``tfs`` (n_traj,). ``aux`` holds per-trajectory solver unknowns
    (shape (n_traj, aux_dim)) when the bundle came from the shooting
    solver, else an (n_traj, 0) array.
    """

    problem: str
    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    tfs: np.ndarray
    aux: np.ndarray = None

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}")
        self.times = np.asarray(self.times, dtype=np.float64)
        self.states = np.asarray(self.states, dtype=np.float64)
        self.controls = np.asarray(self.controls, dtype=np.float64)
        self.tfs = np.asarray(self.tfs, dtype=np.float64)
        if self.aux is None:
            self.aux = np.zeros((self.n_trajectories, 0))
        self.aux = np.asarray(self.aux, dtype=np.float64)
        n, s = self.times.shape
        if self.states.shape[:2] != (n, s) or self.controls.shape[:2] != (n, s):
            raise DimensionMismatchError("record blocks are misaligned")
        if self.tfs.shape != (n,) or self.aux.shape[0] != n:
            raise DimensionMismatchError("per-trajectory blocks are misaligned")
        sd, cd = PROBLEM_DIMS[self.problem]
        if self.states.shape[2] != sd or self.controls.shape[2] != cd:
            raise DimensionMismatchError(
                f"{self.problem} expects dims {(sd, cd)}, "
                f"got {(self.states.shape[2], self.controls.shape[2])}"
            )
        for name, arr in (("times", self.times), ("states", self.states),
                          ("controls", self.controls), ("tfs", self.tfs), ("aux", self.aux)):
            if not np.all(np.isfinite(arr)):
                raise NonFiniteError(f"non-finite values in dataset {name}")

    @property
    def n_trajectories(self) -> int:
        return self.times.shape[0]

    @property
    def samples_per_trajectory(self) -> int:
        return self.times.shape[1]

    @property
    def n_samples(self) -> int:
        return self.times.size

    @property
    def state_dim(self) -> int:
        return self.states.shape[2]

    @property
    def control_dim(self) -> int:
        return self.controls.shape[2]

    def flat_states(self):
        return self.states.reshape(-1, self.state_dim)

    def flat_controls(self):
        return self.controls.reshape(-1, self.control_dim)

    def select(self, indices) -> "TrajectoryDataset":
        indices = np.asarray(indices, dtype=int)
        return TrajectoryDataset(
            self.problem,
            self.times[indices],
            self.states[indices],
            self.controls[indices],
            self.tfs[indices],
            self.aux[indices],
        )


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")


def split(dataset: TrajectoryDataset, spec: SplitSpec):
    """Partition whole trajectories into train/validation subsets."""
    n = dataset.n_trajectories
    if n < 2:
        raise ValueError("need at least two trajectories to split")
    order = np.random.default_rng(spec.seed).permutation(n)
    n_train = int(round(n * spec.train_fraction))
    n_train = min(max(n_train, 1), n - 1)
    return dataset.select(np.sort(order[:n_train])), dataset.select(np.sort(order[n_train:]))


class ScalingTransform:
    """Affine map sending each input component's [min, max] to [-1, 1].

    Fitted on the training split only. Validation inputs may land
    outside [-1, 1]; they are logged, never clamped.
    """

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=np.float64)
        self.hi = np.asarray(hi, dtype=np.float64)
        bad = np.nonzero(~(self.hi > self.lo))[0]
        if bad.size:
            raise ValueError(f"constant input component(s) {bad.tolist()}: max must exceed min")

    def transform(self, x):
        return 2.0 * (np.asarray(x, dtype=np.float64) - self.lo) / (self.hi - self.lo) - 1.0

    def invert(self, y):
        return (np.asarray(y, dtype=np.float64) + 1.0) * (self.hi - self.lo) / 2.0 + self.lo

    def check_range(self, x, label="inputs"):
        y = self.transform(x)
        n_out = int(np.sum(np.any(np.abs(np.atleast_2d(y)) > 1.0, axis=1)))
        if n_out:
            logger.info("%d %s fall outside [-1, 1] after scaling", n_out, label)
        return y

    def to_dict(self):
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @staticmethod
    def from_dict(d):
        return ScalingTransform(d["lo"], d["hi"])


def fit_scaler(train_split: TrajectoryDataset) -> ScalingTransform:
    flat = train_split.flat_states()
    if flat.shape[0] == 0:
        raise ValueError("cannot fit a scaler on an empty split")
    return ScalingTransform(flat.min(axis=0), flat.max(axis=0))


def batches(train_split: TrajectoryDataset, scaler: ScalingTransform,
            batch_size: int, epoch_seed: int):
    """Seeded shuffled minibatches of (scaled states, raw controls).

    The last partial batch is kept, so one epoch visits every sample
    exactly once.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    states = scaler.transform(train_split.flat_states())
    controls = train_split.flat_controls()
    order = np.random.default_rng(epoch_seed).permutation(states.shape[0])
    for start in range(0, len(order), batch_size):
        idx = order[start:start + batch_size]
        yield states[idx], controls[idx]


# ---------------------------------------------------------------------------
# container I/O

_HEADER_FMT = "<4sIBxxxIIIII"
_HEADER_SIZE = struct.calcsize(_HEADER_FMT)


def write_dataset(path, dataset: TrajectoryDataset) -> None:
    n, s = dataset.n_trajectories, dataset.samples_per_trajectory
    aux_dim = dataset.aux.shape[1]
    header = struct.pack(
        _HEADER_FMT,
        MAGIC,
        VERSION,
        _PROBLEM_CODES[dataset.problem],
        dataset.state_dim,
        dataset.control_dim,
        s,
        n,
        aux_dim,
    )
    idx = np.repeat(np.arange(n, dtype=np.float64)[:, None], s, axis=1)
    tf_col = np.repeat(dataset.tfs[:, None], s, axis=1)
    records = np.concatenate(
        [
            idx[:, :, None],
            dataset.times[:, :, None],
            dataset.states,
            dataset.controls,
            tf_col[:, :, None],
        ],
        axis=2,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(records, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(dataset.aux, dtype="<f8").tobytes())


def read_dataset(path, expect_problem: str = None) -> TrajectoryDataset:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER_SIZE:
        raise TruncatedDataError("file shorter than the container header")
    magic, version, code, state_dim, control_dim, s, n, aux_dim = struct.unpack(
        _HEADER_FMT, blob[:_HEADER_SIZE]
    )
    if magic != MAGIC:
        raise CorruptHeaderError("bad dataset magic")
    if version != VERSION:
        raise CorruptHeaderError(f"unsupported dataset version {version}")
    if code >= len(PROBLEMS):
        raise CorruptHeaderError(f"unknown problem code {code}")
    problem = PROBLEMS[code]
    if expect_problem is not None and problem != expect_problem:
        raise ProblemMismatchError(f"file holds {problem!r}, expected {expect_problem!r}")
    sd, cd = PROBLEM_DIMS[problem]
    if (state_dim, control_dim) != (sd, cd):
        raise DimensionMismatchError(
            f"{problem} container declares dims {(state_dim, control_dim)}, expected {(sd, cd)}"
        )
    row = 1 + 1 + state_dim + control_dim + 1
    expected = _HEADER_SIZE + 8 * (n * s * row + n * aux_dim)
    if len(blob) < expected:
        raise TruncatedDataError(f"expected {expected} bytes, file has {len(blob)}")
    if len(blob) > expected:
        raise CorruptHeaderError(f"{len(blob) - expected} trailing bytes after records")
    records = np.frombuffer(blob, dtype="<f8", count=n * s * row, offset=_HEADER_SIZE)
    records = records.reshape(n, s, row)
    aux = np.frombuffer(blob, dtype="<f8", count=n * aux_dim,
                        offset=_HEADER_SIZE + 8 * n * s * row).reshape(n, aux_dim)
    return TrajectoryDataset(
        problem,
        records[:, :, 1].copy(),
        records[:, :, 2:2 + state_dim].copy(),
        records[:, :, 2 + state_dim:2 + state_dim + control_dim].copy(),
        records[:, 0, -1].copy(),
        aux.copy(),
    )


# ---------------------------------------------------------------------------
# CSV import/export (used to ingest externally produced drone data)

def csv_header(problem: str) -> str:
    sd, cd = PROBLEM_DIMS[problem]
    cols = ["traj", "time"]
    cols += [f"s{i}" for i in range(sd)]
    cols += [f"c{i}" for i in range(cd)]
    cols.append("tf")
    return ",".join(cols)


def export_csv(path, dataset: TrajectoryDataset) -> None:
    sd, cd = dataset.state_dim, dataset.control_dim
    with open(path, "w") as fh:
        fh.write(csv_header(dataset.problem) + "\n")
        for i in range(dataset.n_trajectories):
            for j in range(dataset.samples_per_trajectory):
                row = [str(i), repr(float(dataset.times[i, j]))]
                row += [repr(float(v)) for v in dataset.states[i, j]]
                row += [repr(float(v)) for v in dataset.controls[i, j]]
                row.append(repr(float(dataset.tfs[i])))
                fh.write(",".join(row) + "\n")


def import_csv(path, problem: str) -> TrajectoryDataset:
    """Parse and validate a sample-per-row CSV into a dataset.

    Violations are reported with 1-based row numbers. Every trajectory
    must carry the same number of samples; controls must satisfy the
    problem's constraints (throttles in [0, 1], unit directions).
    """
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}")
    sd, cd = PROBLEM_DIMS[problem]
    width = 2 + sd + cd + 1
    rows = []
    with open(path) as fh:
        lines = fh.read().splitlines()
    start = 0
    if lines and lines[0].lstrip().startswith("traj"):
        start = 1
    for lineno in range(start, len(lines)):
        line = lines[lineno].strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != width:
            raise DimensionMismatchError(
                f"row {lineno + 1}: expected {width} columns for {problem}, got {len(parts)}"
            )
        try:
            rows.append((lineno + 1, np.array([float(p) for p in parts])))
        except ValueError:
            raise CorruptHeaderError(f"row {lineno + 1}: non-numeric field")
    if not rows:
        raise TruncatedDataError("no data rows in CSV")

    by_traj: dict[int, list] = {}
    for lineno, vals in rows:
        if not np.all(np.isfinite(vals)):
            raise NonFiniteError(f"row {lineno}: non-finite value")
        u = vals[2 + sd:2 + sd + cd]
        if problem == "drone" and (np.any(u < 0.0) or np.any(u > 1.0)):
            raise ValueError(f"row {lineno}: drone control outside [0, 1]")
        if problem == "landing":
            if not 0.0 <= u[0] <= 1.0:
                raise ValueError(f"row {lineno}: throttle outside [0, 1]")
            if abs(np.linalg.norm(u[1:]) - 1.0) > 1e-6:
                raise ValueError(f"row {lineno}: thrust direction is not a unit vector")
        if problem == "transfer" and abs(np.linalg.norm(u) - 1.0) > 1e-6:
            raise ValueError(f"row {lineno}: thrust direction is not a unit vector")
        by_traj.setdefault(int(vals[0]), []).append(vals)

    counts = {len(v) for v in by_traj.values()}
    if len(counts) != 1:
        raise DimensionMismatchError(f"unequal samples per trajectory: {sorted(counts)}")
    s = counts.pop()
    keys = sorted(by_traj)
    n = len(keys)
    times = np.empty((n, s))
    states = np.empty((n, s, sd))
    controls = np.empty((n, s, cd))
    tfs = np.empty(n)
    for i, k in enumerate(keys):
        block = np.array(by_traj[k])
        order = np.argsort(block[:, 1], kind="stable")
        block = block[order]
        times[i] = block[:, 1]
        states[i] = block[:, 2:2 + sd]
        controls[i] = block[:, 2 + sd:2 + sd + cd]
        tfs[i] = block[0, -1]
    return TrajectoryDataset(problem, times, states, controls, tfs)
