"""
Communication Graph - range-limited links relayed within components
"""

import numpy as np


def _linked(a, b):
    limit = min(a.comm_range, b.comm_range)
    return float(np.linalg.norm(a.position - b.position)) <= limit


def meeting_pairs(robots):
    """All (a, b) id pairs with a < b that are within radio range of each other."""
    ordered = sorted(robots, key=lambda r: r.id)
    pairs = []
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            if _linked(a, b):
                pairs.append((a.id, b.id))
    return pairs


def comm_graph(robots):
    """
    Connected components of the closed-threshold radio graph.
    Returns frozensets of robot ids, ordered by smallest member.
    """
    parent = {robot.id: robot.id for robot in robots}

    def find(node):
        while parent[node] != node:
            parent[node] = parent[parent[node]]
            node = parent[node]
        return node

    for a, b in meeting_pairs(robots):
        root_a, root_b = find(a), find(b)
        if root_a != root_b:
            parent[max(root_a, root_b)] = min(root_a, root_b)

    groups = {}
    for robot_id in parent:
        groups.setdefault(find(robot_id), set()).add(robot_id)
    return sorted((frozenset(group) for group in groups.values()), key=min)
