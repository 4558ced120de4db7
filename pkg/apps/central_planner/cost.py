"""
Cost Matrix - travel times between robots and super viewpoints
"""

import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

ROBOT = 'robot'
SVP = 'svp'


@dataclass(eq=False)
class CostMatrix:
    """
    Nodes are the robots (indices 0..n-1, ordered by robot id) followed by the
    reachable super viewpoints. `d` holds seconds; d[i][i] = 0.
    """

    d: np.ndarray
    positions: np.ndarray
    n_robots: int
    robot_ids: tuple = ()
    svp_keys: tuple = ()
    excluded: tuple = field(default_factory=tuple)

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=float)
        if not self.robot_ids:
            self.robot_ids = tuple(range(self.n_robots))
        if not self.svp_keys:
            self.svp_keys = tuple(range(self.n_svps))

    @property
    def size(self):
        return len(self.d)

    @property
    def n_svps(self):
        return self.size - self.n_robots

    @property
    def svp_nodes(self):
        return range(self.n_robots, self.size)

    def kind(self, node):
        return ROBOT if node < self.n_robots else SVP

    def robot_node(self, robot_id):
        return self.robot_ids.index(robot_id)

    def svp_key(self, node):
        return self.svp_keys[node - self.n_robots]

    def path_cost(self, nodes):
        return float(sum(self.d[a, b] for a, b in zip(nodes, nodes[1:])))

    def restricted(self, svp_nodes):
        """Sub-instance keeping all robots and only the given SVP nodes."""
        keep = list(range(self.n_robots)) + list(svp_nodes)
        return CostMatrix(
            d=self.d[np.ix_(keep, keep)],
            positions=self.positions[keep],
            n_robots=self.n_robots,
            robot_ids=self.robot_ids,
            svp_keys=tuple(self.svp_key(node) for node in svp_nodes),
        )


def build_cost_matrix(roadmap, robots, svps, v_max=None):
    """
    Motion costs from roadmap lengths divided by the slowest member's v_max.
    SVPs some robot cannot reach are dropped and listed in `excluded`.
    """
    robots = sorted(robots, key=lambda r: r.id)
    v_max = v_max or min(robot.v_max for robot in robots)
    svps = sorted(svps, key=lambda s: s.key)
    points = np.array([r.position for r in robots] + [s.target for s in svps]).reshape(-1, 3)
    lengths = roadmap.distances(points)
    n = len(robots)
    reachable = [n + j for j in range(len(svps)) if np.all(np.isfinite(lengths[:n, n + j]))]
    excluded = tuple(svps[j - n].key for j in range(n, n + len(svps)) if j not in reachable)
    if excluded:
        logger.debug(f'{len(excluded)} super viewpoints unreachable from the meeting')
    keep = list(range(n)) + reachable
    return CostMatrix(
        d=lengths[np.ix_(keep, keep)] / v_max,
        positions=points[keep],
        n_robots=n,
        robot_ids=tuple(r.id for r in robots),
        svp_keys=tuple(svps[j - n].key for j in reachable),
        excluded=excluded,
    )


def euclidean_cost_matrix(robot_positions, svp_positions, v_max=1.0):
    """Straight-line instance, used for offline solver benchmarks and fixtures."""
    points = np.vstack([np.atleast_2d(robot_positions), np.atleast_2d(svp_positions)]).astype(float)
    d = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2) / v_max
    return CostMatrix(d=d, positions=points, n_robots=len(np.atleast_2d(robot_positions)))
