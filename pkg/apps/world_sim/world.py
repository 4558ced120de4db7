"""
Voxel World - occupancy grid and voxel ray casting
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from apps.core.exceptions import RayOriginError, ScenarioError

logger = logging.getLogger(__name__)

FREE = 0
OCCUPIED = 1


@dataclass(frozen=True)
class RayResult:
    """Outcome of a ray cast; `hit` is the center of the first occupied cell."""

    unobstructed: bool
    hit: np.ndarray = None
    cell: tuple = None


class VoxelWorld:
    """
    Axis-aligned occupancy grid. Anything outside the bounds is occupied.
    """

    def __init__(self, occupancy, resolution, origin=(0.0, 0.0, 0.0)):
        occupancy = np.asarray(occupancy, dtype=bool)
        if occupancy.ndim != 3 or min(occupancy.shape) < 1:
            raise ScenarioError('World needs at least one cell on every axis.')
        if resolution <= 0:
            raise ScenarioError('World resolution must be positive.')
        self.occupancy = occupancy
        self.resolution = float(resolution)
        self.origin = np.asarray(origin, dtype=float)
        self.dims = np.array(occupancy.shape, dtype=int)

    @property
    def bounds(self):
        return self.origin, self.origin + self.dims * self.resolution

    @property
    def free_count(self):
        return int((~self.occupancy).sum())

    @classmethod
    def empty(cls, size, resolution, origin=(0.0, 0.0, 0.0)):
        dims = np.maximum(np.round(np.asarray(size, dtype=float) / resolution).astype(int), 1)
        return cls(np.zeros(dims, dtype=bool), resolution, origin)

    # Cell helpers

    def cell_of(self, point):
        return tuple(np.floor((np.asarray(point, dtype=float) - self.origin) / self.resolution).astype(int))

    def cells_of(self, points):
        return np.floor((np.asarray(points, dtype=float) - self.origin) / self.resolution).astype(int)

    def cell_center(self, cell):
        return self.origin + (np.asarray(cell, dtype=float) + 0.5) * self.resolution

    def in_bounds(self, cell):
        return all(0 <= c < d for c, d in zip(cell, self.dims))

    def is_occupied_cell(self, cell):
        if not self.in_bounds(cell):
            return True
        return bool(self.occupancy[cell])

    def is_occupied(self, point):
        return self.is_occupied_cell(self.cell_of(point))

    def occupied_mask(self, points):
        """Vectorised occupancy lookup for an (N, 3) array of points."""
        cells = self.cells_of(points)
        inside = np.all((cells >= 0) & (cells < self.dims), axis=1)
        result = np.ones(len(cells), dtype=bool)
        if inside.any():
            c = cells[inside]
            result[inside] = self.occupancy[c[:, 0], c[:, 1], c[:, 2]]
        return result

    # Editing

    def fill_box(self, lower, upper):
        """Mark every cell overlapping the metric box [lower, upper] as occupied."""
        lo = np.clip(self.cells_of(np.asarray([lower]))[0], 0, self.dims - 1)
        hi_point = np.asarray(upper, dtype=float) - 1e-9
        hi = np.clip(self.cells_of(np.asarray([hi_point]))[0], 0, self.dims - 1)
        if np.any(hi < lo):
            return
        self.occupancy[lo[0]:hi[0] + 1, lo[1]:hi[1] + 1, lo[2]:hi[2] + 1] = True

    def seal_unreachable(self, seed_points):
        """
        Occupy every free cell not 6-connected to the first seed point.
        Raises ScenarioError when the seeds are not mutually reachable.
        """
        labels, count = ndimage.label(~self.occupancy)
        seed_labels = []
        for point in seed_points:
            cell = self.cell_of(point)
            if self.is_occupied_cell(cell):
                raise ScenarioError(f'Start {tuple(point)} lies in an occupied cell.')
            seed_labels.append(labels[cell])
        if len(set(seed_labels)) > 1:
            raise ScenarioError('Robot starts are not connected through free space.')
        sealed = (labels != seed_labels[0]) & (labels > 0)
        if sealed.any():
            logger.debug(f'Sealing {int(sealed.sum())} unreachable free cells')
        self.occupancy |= sealed
        return int(sealed.sum())


def cast_ray(world, origin, target):
    """
    Walk the voxels crossed by the segment origin->target (Amanatides-Woo stepping).
    Returns the first occupied cell met before the target, target cell included.
    """
    origin = np.asarray(origin, dtype=float)
    target = np.asarray(target, dtype=float)
    cell = list(world.cell_of(origin))
    if world.is_occupied_cell(tuple(cell)):
        raise RayOriginError(f'Ray origin {tuple(origin)} lies in occupied cell {tuple(cell)}.', cell=tuple(cell))

    end_cell = list(world.cell_of(target))
    if cell == end_cell:
        return RayResult(True)

    delta = (target - origin) / world.resolution
    local = (origin - world.origin) / world.resolution
    step = [0, 0, 0]
    t_max = [np.inf, np.inf, np.inf]
    t_delta = [np.inf, np.inf, np.inf]
    for axis in range(3):
        d = delta[axis]
        if d > 0:
            step[axis] = 1
            t_max[axis] = (cell[axis] + 1 - local[axis]) / d
            t_delta[axis] = 1.0 / d
        elif d < 0:
            step[axis] = -1
            t_max[axis] = (local[axis] - cell[axis]) / -d
            t_delta[axis] = -1.0 / d

    while True:
        axis = int(np.argmin(t_max))
        if t_max[axis] > 1.0:
            return RayResult(True)
        cell[axis] += step[axis]
        t_max[axis] += t_delta[axis]
        current = tuple(cell)
        if world.is_occupied_cell(current):
            return RayResult(False, world.cell_center(current), current)
        if cell == end_cell:
            return RayResult(True)
