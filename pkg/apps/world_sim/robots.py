"""
Robot State and Kinematic Stepping
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from apps.core.exceptions import RayOriginError, ScenarioError, SimulationFault
from .comm import meeting_pairs
from .events import ARRIVED, EXPIRED, FRAME, MEET, SimEvent
from .world import cast_ray


@dataclass
class RobotState:
    """
    Kinematic robot with a range sensor and a radio.
    `path` holds the waypoints still to be driven, in order.
    """

    id: int
    position: np.ndarray
    yaw: float = 0.0
    v_max: float = 1.0
    sensor_range: float = 10.0
    fov_h: float = 2 * math.pi
    fov_v: float = math.pi
    comm_range: float = 3.0
    path: tuple = field(default_factory=tuple)

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        if self.v_max <= 0:
            raise ScenarioError(f'Robot {self.id}: v_max must be positive.')
        if self.sensor_range <= 0:
            raise ScenarioError(f'Robot {self.id}: sensor range must be positive.')
        if self.comm_range <= 0:
            raise ScenarioError(f'Robot {self.id}: comm range must be positive.')

    @property
    def is_moving(self):
        return len(self.path) > 0

    def with_path(self, waypoints):
        return replace(self, path=tuple(np.asarray(w, dtype=float) for w in waypoints))


def _advance(world, robot, distance):
    position = robot.position.copy()
    waypoints = list(robot.path)
    yaw = robot.yaw
    travelled = 0.0
    remaining = distance

    while remaining > 1e-12 and waypoints:
        segment = waypoints[0] - position
        length = float(np.linalg.norm(segment))
        if length <= remaining:
            new_position = waypoints.pop(0).copy()
        else:
            new_position = position + segment * (remaining / length)
            length = remaining
        try:
            ray = cast_ray(world, position, new_position)
        except RayOriginError:
            raise SimulationFault(robot.id, world.cell_of(position))
        if not ray.unobstructed:
            raise SimulationFault(robot.id, ray.cell)
        if length > 0 and (segment[0] or segment[1]):
            yaw = math.atan2(segment[1], segment[0])
        position = new_position
        remaining -= length
        travelled += length

    return replace(robot, position=position, yaw=yaw, path=tuple(waypoints)), travelled


def step(world, robots, dt, t=0.0, frame_due=None, deadlines=None):
    """
    Advance every robot by at most v_max * dt along its path.

    frame_due: optional predicate robot -> bool marking a sensor frame as due.
    deadlines: optional {robot_id: T_c}; EXPIRED fires on the tick that crosses it.
    Returns (robots, events, travelled) with travelled keyed by robot id.
    """
    if dt <= 0:
        return [replace(robot) for robot in robots], [], {robot.id: 0.0 for robot in robots}

    t_next = t + dt
    moved = []
    events = []
    travelled = {}
    for robot in robots:
        updated, distance = _advance(world, robot, robot.v_max * dt)
        moved.append(updated)
        travelled[robot.id] = distance
        if robot.path and not updated.path:
            events.append(SimEvent(t_next, robot.id, ARRIVED))

    if frame_due is not None:
        for robot in moved:
            if frame_due(robot):
                events.append(SimEvent(t_next, robot.id, FRAME))

    for a, b in meeting_pairs(moved):
        events.append(SimEvent(t_next, a, MEET, str(b)))
        events.append(SimEvent(t_next, b, MEET, str(a)))

    for robot_id, deadline in sorted((deadlines or {}).items()):
        if t <= deadline < t_next:
            events.append(SimEvent(t_next, robot_id, EXPIRED, f'{deadline:.3f}'))

    events.sort()
    return moved, events, travelled
