"""
Baseline Coordination
Reimplementations of the essence of the compared strategies, sharing the same
simulator, sensing and SFI code as the mission protocol:

  no_coord    each robot greedily picks its own best super viewpoint and never talks
  continuous  one leader per component explores greedily; followers trail it and
              any move that would break the radio graph is undone
"""

import numpy as np

from apps.central_planner.roadmap import Roadmap
from apps.world_sim.comm import comm_graph

OURS = 'ours'
NO_COORD = 'no_coord'
CONTINUOUS = 'continuous'
KINDS = (OURS, NO_COORD, CONTINUOUS)

_ALIASES = {'no-coord': NO_COORD, 'no_coordination': NO_COORD, 'continuous_connection': CONTINUOUS}


def normalize_kind(kind):
    kind = _ALIASES.get(kind, kind)
    if kind not in KINDS:
        raise ValueError(f'Unknown coordination kind {kind!r}; expected one of {KINDS}.')
    return kind


def svp_utility(library, svp):
    """Number of live frontier meshes behind a super viewpoint."""
    return sum(len(library.clusters[fc_id]) for fc_id in svp.members if fc_id in library.clusters)


def greedy_target(library, robot, excluded=()):
    """
    Super viewpoint minimising travel / (1 + utility) from the robot's position
    over its own library. Ties go to the smallest key. None when nothing is reachable.
    """
    svps = sorted((s for s in library.svps if s.key not in excluded), key=lambda s: s.key)
    if not svps:
        return None
    lengths = Roadmap(library).distances(np.array([robot.position] + [s.target for s in svps]))
    best = None
    for j, svp in enumerate(svps, start=1):
        travel = lengths[0, j]
        if not np.isfinite(travel):
            continue
        score = travel / (1.0 + svp_utility(library, svp))
        if best is None or score < best[0] - 1e-12:
            best = (score, svp)
    return None if best is None else best[1]


def leaders(robots):
    """Smallest id of every radio component, keyed by member id."""
    mapping = {}
    for component in comm_graph(robots):
        for robot_id in component:
            mapping[robot_id] = min(component)
    return mapping


def keep_connected(before, after):
    """
    Undo moves that split a component: robots cut off from their former leader's
    component return to their previous state. If the leader itself drifted away
    from everyone, it is held back too.
    """
    previous = {robot.id: robot for robot in before}
    leader_of = leaders(before)
    robots = list(after)
    for _ in range(len(robots)):
        current = {robot_id: component for component in comm_graph(robots) for robot_id in component}
        broken = sorted(
            robot.id for robot in robots
            if leader_of[robot.id] != robot.id and leader_of[robot.id] not in current[robot.id]
        )
        if not broken:
            lonely = sorted(
                leader for leader in set(leader_of.values())
                if len(current[leader]) == 1 and sum(1 for v in leader_of.values() if v == leader) > 1
            )
            if not lonely:
                return robots
            broken = lonely
        robots = [previous[robot.id] if robot.id in broken else robot for robot in robots]
    return robots
