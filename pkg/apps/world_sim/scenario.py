"""
Scenario Loading - JSON scenario files into worlds and robots
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from apps.core.conf import get_config
from apps.core.exceptions import ScenarioError
from .robots import RobotState
from .serializers import ScenarioSerializer
from .world import VoxelWorld

logger = logging.getLogger(__name__)


@dataclass
class Scenario:
    name: str
    world: dict
    robots: list
    dt: float = 0.5
    seed: int = 0
    extra_time: float = 20.0
    tick_cap: int = None
    solver: dict = field(default_factory=dict)
    source: str = ''

    @property
    def floor_area(self):
        size = self.world['size']
        return size[0] * size[1]

    def config(self, **overrides):
        solver = {key: value for key, value in self.solver.items() if value is not None}
        solver['extra_time_s'] = self.extra_time
        if self.tick_cap:
            solver['tick_cap'] = self.tick_cap
        solver.update(overrides)
        return get_config(**solver)


def load_scenario(source):
    """Validate a scenario given as a path or an already parsed dict."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            payload = json.loads(path.read_text())
        except (OSError, ValueError) as exc:
            raise ScenarioError(f'Cannot read scenario {path}: {exc}')
        origin = str(path)
    else:
        payload, origin = source, '<inline>'

    serializer = ScenarioSerializer(data=payload)
    if not serializer.is_valid():
        raise ScenarioError('Scenario validation failed.', errors=serializer.errors)
    data = serializer.validated_data
    return Scenario(
        name=data['name'],
        world=dict(data['world']),
        robots=[dict(spec) for spec in data['robots']],
        dt=data['dt'],
        seed=data['seed'],
        extra_time=data['extra_time'],
        tick_cap=data.get('tick_cap'),
        solver=dict(data.get('solver') or {}),
        source=origin,
    )


def _add_random_obstacles(world, spec, rng, starts):
    size = np.asarray(_world_size(world))
    mean_side = 0.5 * (spec['min_size'] + spec['max_size'])
    count = spec['count']
    if spec.get('density'):
        count = max(count, int(round(spec['density'] * size[0] * size[1] / mean_side ** 2)))
    lower, upper = world.bounds
    placed = 0
    for _ in range(count):
        side = rng.uniform(spec['min_size'], spec['max_size'], size=2)
        corner = lower[:2] + rng.uniform(0.0, 1.0, size=2) * (size[:2] - side)
        box_lo = np.array([corner[0], corner[1], lower[2]])
        box_hi = np.array([corner[0] + side[0], corner[1] + side[1], upper[2]])
        if any(_box_distance_2d(box_lo, box_hi, s) < spec['clearance'] for s in starts):
            continue
        world.fill_box(box_lo, box_hi)
        placed += 1
    return placed


def _add_rooms(world, spec, rng):
    lower, upper = world.bounds
    spacing = spec['spacing']
    thickness = spec['wall_thickness']
    door = spec['door_width']
    for axis in (0, 1):
        other = 1 - axis
        lines = np.arange(lower[axis] + spacing, upper[axis] - thickness, spacing)
        cuts = np.concatenate([[lower[other]], np.arange(lower[other] + spacing, upper[other], spacing), [upper[other]]])
        for line in lines:
            for a, b in zip(cuts[:-1], cuts[1:]):
                if b - a <= door:
                    continue
                gap = a + rng.uniform(0.0, (b - a) - door)
                for seg_lo, seg_hi in ((a, gap), (gap + door, b)):
                    if seg_hi - seg_lo <= 0:
                        continue
                    box_lo = np.array(lower, dtype=float)
                    box_hi = np.array(upper, dtype=float)
                    box_lo[axis], box_hi[axis] = line - thickness / 2, line + thickness / 2
                    box_lo[other], box_hi[other] = seg_lo, seg_hi
                    world.fill_box(box_lo, box_hi)


def _box_distance_2d(lo, hi, point):
    dx = max(lo[0] - point[0], 0.0, point[0] - hi[0])
    dy = max(lo[1] - point[1], 0.0, point[1] - hi[1])
    return math.hypot(dx, dy)


def _world_size(world):
    return world.dims * world.resolution


def build_world(scenario):
    """
    Rasterise the scenario world. Layout randomness draws only from the scenario seed.
    Free pockets unreachable from the robot starts are sealed.
    """
    spec = scenario.world
    world = VoxelWorld.empty(spec['size'], spec['resolution'], spec.get('origin', (0.0, 0.0, 0.0)))
    rng = np.random.default_rng(scenario.seed)
    starts = [np.asarray(robot['start'], dtype=float) for robot in scenario.robots]

    for box in spec.get('boxes', []):
        world.fill_box(box['min'], box['max'])
    if spec.get('rooms'):
        _add_rooms(world, spec['rooms'], rng)
    if spec.get('random'):
        placed = _add_random_obstacles(world, spec['random'], rng, starts)
        logger.debug(f'{scenario.name}: placed {placed} random obstacles')

    clearance = (spec.get('random') or {}).get('clearance', 1.0)
    for start in starts:
        _clear_around(world, start, clearance)
    world.seal_unreachable(starts)
    return world


def _clear_around(world, point, radius):
    lower, upper = world.bounds
    box_lo = np.array([point[0] - radius, point[1] - radius, lower[2]])
    box_hi = np.array([point[0] + radius, point[1] + radius, upper[2]])
    lo = np.clip(world.cells_of([box_lo])[0], 0, world.dims - 1)
    hi = np.clip(world.cells_of([box_hi - 1e-9])[0], 0, world.dims - 1)
    world.occupancy[lo[0]:hi[0] + 1, lo[1]:hi[1] + 1, :] = False


def build_robots(scenario):
    robots = []
    for index, spec in enumerate(scenario.robots):
        robots.append(RobotState(
            id=spec.get('id', index),
            position=np.asarray(spec['start'], dtype=float),
            yaw=spec['yaw'],
            v_max=spec['v_max'],
            sensor_range=spec['sensor_range'],
            fov_h=math.radians(spec['fov_h_deg']),
            fov_v=math.radians(spec['fov_v_deg']),
            comm_range=spec['comm_range'],
        ))
    return sorted(robots, key=lambda r: r.id)
