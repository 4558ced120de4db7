"""
Run Metrics
Definitions:
  repeated_pct     cells observed by two or more robots / cells observed
  independent_pct  cells first observed by a robot alone in its comm component / cells observed
  traj_length      executed polyline length per robot
"""

from dataclasses import asdict, dataclass, field

import numpy as np


@dataclass
class FrameObservation:
    t: float
    robot: int
    cells: np.ndarray
    isolated: bool


class ObservationLog:
    """Cells (flat voxel indices) seen per frame, in sensing order."""

    def __init__(self):
        self.frames = []

    def record(self, t, robot, cells, isolated):
        self.frames.append(FrameObservation(float(t), int(robot), np.unique(np.asarray(cells, dtype=np.int64)),
                                            bool(isolated)))

    def __len__(self):
        return len(self.frames)

    def observed_cells(self):
        if not self.frames:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate([frame.cells for frame in self.frames]))

    def observed_count_series(self):
        """(t, cumulative observed cell count) after each frame."""
        seen = set()
        series = []
        for frame in self.frames:
            seen.update(frame.cells.tolist())
            series.append((frame.t, len(seen)))
        return series


def coverage_fractions(log):
    """(repeated_pct, independent_pct, observed cell count)."""
    observers = {}
    first_isolated = {}
    for frame in log.frames:
        for cell in frame.cells.tolist():
            observers.setdefault(cell, set()).add(frame.robot)
            if cell not in first_isolated:
                first_isolated[cell] = frame.isolated
    observed = len(observers)
    if observed == 0:
        return 0.0, 0.0, 0
    repeated = sum(1 for robots in observers.values() if len(robots) >= 2)
    independent = sum(1 for isolated in first_isolated.values() if isolated)
    return 100.0 * repeated / observed, 100.0 * independent / observed, observed


TIMING_BINS = (0.0, 0.001, 0.01, 0.1, 1.0, 10.0, 1e9)


def timing_summary(samples):
    """Count, mean, max and a log-spaced histogram of solver wall times in seconds."""
    samples = np.asarray(samples, dtype=float)
    if len(samples) == 0:
        return {'count': 0, 'mean': 0.0, 'max': 0.0, 'histogram': [0] * (len(TIMING_BINS) - 1)}
    counts, _ = np.histogram(samples, bins=TIMING_BINS)
    return {
        'count': int(len(samples)),
        'mean': float(samples.mean()),
        'max': float(samples.max()),
        'histogram': [int(c) for c in counts],
    }


@dataclass
class RunMetrics:
    scenario: str
    strategy: str
    seed: int
    exploration_time: float
    repeated_pct: float
    independent_pct: float
    traj_length: dict
    bytes_per_link: dict
    total_bytes: int
    raw_cloud_bytes: int
    frames: int
    observed_cells: int
    coverage_pct: float
    ticks: int
    complete: bool
    fault: str = ''
    timings: dict = field(default_factory=dict)

    def deterministic(self):
        """Everything except wall-clock solver timings."""
        data = asdict(self)
        data.pop('timings')
        return data

    @property
    def bandwidth_ratio(self):
        return self.total_bytes / self.raw_cloud_bytes if self.raw_cloud_bytes else 0.0


def compute_metrics(log, trajectories, ledger, *, scenario, strategy, seed, exploration_time, reachable_cells,
                    ticks, complete, raw_cloud_bytes, fault='', timings=None):
    repeated, independent, observed = coverage_fractions(log)
    lengths = {}
    for robot_id, points in sorted(trajectories.items()):
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        lengths[str(robot_id)] = float(np.linalg.norm(np.diff(points, axis=0), axis=1).sum()) if len(points) > 1 else 0.0
    return RunMetrics(
        scenario=scenario,
        strategy=strategy,
        seed=seed,
        exploration_time=round(float(exploration_time), 6),
        repeated_pct=round(repeated, 6),
        independent_pct=round(independent, 6),
        traj_length={k: round(v, 6) for k, v in lengths.items()},
        bytes_per_link=ledger.per_link(),
        total_bytes=ledger.total,
        raw_cloud_bytes=int(raw_cloud_bytes),
        frames=len(log),
        observed_cells=observed,
        coverage_pct=round(100.0 * observed / reachable_cells, 6) if reachable_cells else 0.0,
        ticks=ticks,
        complete=complete,
        fault=fault,
        timings={name: timing_summary(values) for name, values in sorted((timings or {}).items())},
    )
