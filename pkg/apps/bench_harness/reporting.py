"""
Run Outputs - CSV artifacts of one run and plot-ready aggregates of a batch
"""

import csv
import json
import logging
from collections import defaultdict
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

METRIC_COLUMNS = [
    'scenario', 'strategy', 'seed', 'exploration_time', 'repeated_pct', 'independent_pct',
    'traj_length', 'bytes_per_link', 'total_bytes', 'raw_cloud_bytes', 'frames', 'observed_cells',
    'coverage_pct', 'ticks', 'complete', 'fault',
]
AGGREGATE_COLUMNS = [
    'scenario', 'strategy', 'runs', 'complete_runs', 'exploration_time_mean', 'exploration_time_std',
    'repeated_pct_mean', 'independent_pct_mean', 'traj_length_mean', 'total_bytes_mean', 'bandwidth_ratio_mean',
]


def metrics_row(metrics):
    data = metrics.deterministic()
    row = []
    for column in METRIC_COLUMNS:
        value = data[column]
        row.append(json.dumps(value, sort_keys=True) if isinstance(value, dict) else value)
    return row


def write_metrics_csv(path, metrics_list):
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(METRIC_COLUMNS)
        for metrics in metrics_list:
            writer.writerow(metrics_row(metrics))


def write_trajectories_csv(path, trajectories, dt):
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(['t', 'robot', 'x', 'y', 'z'])
        for robot_id, points in sorted(trajectories.items()):
            for tick, point in enumerate(points):
                writer.writerow([f'{tick * dt:.3f}', robot_id, *(f'{v:.3f}' for v in point)])


def write_run(result, out_dir, dt):
    """Every artifact of one run under `out_dir`; returns the directory."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_metrics_csv(out_dir / 'metrics.csv', [result.metrics])
    result.ledger.write_csv(out_dir / 'bytes.csv')
    result.events.write_csv(out_dir / 'events.csv')
    result.protocol_trace.write_csv(out_dir / 'protocol.csv')
    result.plan_trace.write_csv(out_dir / 'plans.csv')
    write_trajectories_csv(out_dir / 'trajectories.csv', result.trajectories, dt)
    (out_dir / 'timings.json').write_text(json.dumps(result.metrics.timings, indent=2, sort_keys=True))
    logger.debug(f'Wrote run artifacts to {out_dir}')
    return out_dir


def aggregate(metrics_list):
    """Mean metrics per (scenario, strategy) for plotting."""
    groups = defaultdict(list)
    for metrics in metrics_list:
        groups[(metrics.scenario, metrics.strategy)].append(metrics)
    rows = []
    for (scenario, strategy), group in sorted(groups.items()):
        times = np.array([m.exploration_time for m in group])
        rows.append({
            'scenario': scenario,
            'strategy': strategy,
            'runs': len(group),
            'complete_runs': sum(1 for m in group if m.complete),
            'exploration_time_mean': float(times.mean()),
            'exploration_time_std': float(times.std()),
            'repeated_pct_mean': float(np.mean([m.repeated_pct for m in group])),
            'independent_pct_mean': float(np.mean([m.independent_pct for m in group])),
            'traj_length_mean': float(np.mean([np.mean(list(m.traj_length.values()) or [0.0]) for m in group])),
            'total_bytes_mean': float(np.mean([m.total_bytes for m in group])),
            'bandwidth_ratio_mean': float(np.mean([m.bandwidth_ratio for m in group])),
        })
    return rows


def write_aggregates_csv(path, rows):
    with open(path, 'w', newline='') as handle:
        writer = csv.DictWriter(handle, fieldnames=AGGREGATE_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (f'{v:.6f}' if isinstance(v, float) else v) for k, v in row.items()})
