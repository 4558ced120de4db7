"""
Grid Navigation - 26-connected A* over free voxels
"""

import heapq
import itertools
import math

import numpy as np

# Neighbour offsets paired with the axis-aligned cells a move sweeps through
_OFFSETS = []
for _d in itertools.product((-1, 0, 1), repeat=3):
    if _d == (0, 0, 0):
        continue
    _axes = [i for i in range(3) if _d[i]]
    _swept = []
    for _r in range(1, len(_axes)):
        for _subset in itertools.combinations(_axes, _r):
            _swept.append(tuple(_d[i] if i in _subset else 0 for i in range(3)))
    _OFFSETS.append((_d, math.sqrt(len(_axes)), tuple(_swept)))


def snap_free(world, point, max_radius=None):
    """Nearest free cell to `point`; None when nothing free lies within max_radius cells."""
    cell = world.cell_of(point)
    if not world.is_occupied_cell(cell):
        return cell
    limit = max_radius or int(world.dims.max())
    point = np.asarray(point, dtype=float)
    for radius in range(1, limit + 1):
        lo = np.maximum(np.asarray(cell) - radius, 0)
        hi = np.minimum(np.asarray(cell) + radius + 1, world.dims)
        if np.any(hi <= lo):
            continue
        window = ~world.occupancy[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]]
        free = np.argwhere(window)
        if len(free):
            cells = free + lo
            centers = world.origin + (cells + 0.5) * world.resolution
            distances = np.linalg.norm(centers - point, axis=1)
            return tuple(int(c) for c in cells[int(np.argmin(distances))])
    return None


def grid_astar(world, start, goal):
    """
    Shortest 26-connected voxel path from start to goal without corner cutting.
    Returns (waypoints, length_m); (None, inf) when the goal is unreachable.
    """
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    start_cell = world.cell_of(start)
    goal_cell = snap_free(world, goal)
    if world.is_occupied_cell(start_cell) or goal_cell is None:
        return None, math.inf
    if world.is_occupied_cell(world.cell_of(goal)):
        goal = world.cell_center(goal_cell)

    def heuristic(cell):
        return math.sqrt(sum((a - b) ** 2 for a, b in zip(cell, goal_cell)))

    counter = itertools.count()
    open_heap = [(heuristic(start_cell), next(counter), start_cell)]
    g_score = {start_cell: 0.0}
    came_from = {}
    closed = set()

    while open_heap:
        _, _, current = heapq.heappop(open_heap)
        if current in closed:
            continue
        if current == goal_cell:
            break
        closed.add(current)
        for offset, cost, swept in _OFFSETS:
            neighbour = (current[0] + offset[0], current[1] + offset[1], current[2] + offset[2])
            if neighbour in closed or world.is_occupied_cell(neighbour):
                continue
            if any(world.is_occupied_cell((current[0] + s[0], current[1] + s[1], current[2] + s[2])) for s in swept):
                continue
            tentative = g_score[current] + cost
            if tentative < g_score.get(neighbour, math.inf):
                g_score[neighbour] = tentative
                came_from[neighbour] = current
                heapq.heappush(open_heap, (tentative + heuristic(neighbour), next(counter), neighbour))
    else:
        return None, math.inf

    cells = [goal_cell]
    while cells[-1] != start_cell:
        cells.append(came_from[cells[-1]])
    cells.reverse()

    waypoints = [start] + [world.cell_center(c) for c in cells[1:-1]] + [goal]
    length = float(sum(np.linalg.norm(b - a) for a, b in zip(waypoints, waypoints[1:])))
    return waypoints, length
