"""
Frame Sampling - cylindrical ray sampling of one sensor frame
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from apps.core.conf import get_config
from apps.core.exceptions import EmptyFrameError
from apps.world_sim.world import cast_ray

logger = logging.getLogger(__name__)

TAG_FREE = 0
TAG_OBS = 1


@dataclass(frozen=True)
class SamplePointSets:
    """Free endpoints and first-hit points of one frame, both in world coordinates."""

    origin: np.ndarray
    free: np.ndarray
    obs: np.ndarray

    @property
    def star(self):
        return np.vstack([self.free, self.obs])

    @property
    def tags(self):
        return np.concatenate([
            np.full(len(self.free), TAG_FREE, dtype=np.uint8),
            np.full(len(self.obs), TAG_OBS, dtype=np.uint8),
        ])

    def __len__(self):
        return len(self.free) + len(self.obs)


def sample_offsets(robot, config=None):
    """
    Sample endpoints relative to the robot: azimuth steps within the horizontal fov,
    rings evenly spaced in elevation across the vertical fov, each pushed out to the
    sensor range. A full vertical fov puts single samples at the poles.
    """
    config = config or get_config()
    radius = robot.sensor_range
    step = math.radians(config.sampler_azimuth_step_deg)

    if robot.fov_h >= 2 * math.pi - 1e-9:
        count = int(round(2 * math.pi / step))
        azimuths = robot.yaw + np.arange(count) * (2 * math.pi / count)
    else:
        count = int(math.floor(robot.fov_h / step + 1e-9)) + 1
        azimuths = robot.yaw + np.linspace(-robot.fov_h / 2, robot.fov_h / 2, count)

    half_span = min(robot.fov_v, math.pi) / 2
    elevations = np.linspace(-half_span, half_span, config.sampler_height_rings)

    offsets = []
    for elevation in elevations:
        z = radius * math.sin(elevation)
        rho = radius * math.cos(elevation)
        if rho < 1e-9:
            offsets.append(np.array([[0.0, 0.0, z]]))
            continue
        ring = np.column_stack([rho * np.cos(azimuths), rho * np.sin(azimuths), np.full(len(azimuths), z)])
        offsets.append(ring)
    return np.vstack(offsets)


def sample_frame(world, robot, config=None):
    """
    Cast one ray per sample direction. Unobstructed endpoints go to the free set,
    obstructed rays contribute their first hit, kept within the sensor range.
    """
    origin = np.asarray(robot.position, dtype=float)
    free, obs = [], []
    for offset in sample_offsets(robot, config):
        target = origin + offset
        ray = cast_ray(world, origin, target)
        if ray.unobstructed:
            free.append(target)
            continue
        hit = ray.hit
        distance = float(np.linalg.norm(hit - origin))
        if distance > robot.sensor_range:
            hit = origin + (hit - origin) * (robot.sensor_range / distance)
        obs.append(hit)

    if not free:
        logger.warning(f'Robot {robot.id}: empty frame at {tuple(np.round(origin, 2))}')
        raise EmptyFrameError(f'Robot {robot.id} sees no free space.', robot_id=robot.id)

    return SamplePointSets(
        origin=origin,
        free=np.asarray(free, dtype=float),
        obs=np.asarray(obs, dtype=float).reshape(-1, 3),
    )


def should_generate(robot, last_gen_position, config=None):
    """True at bootstrap or once the robot has moved gen_spacing since the last polytope."""
    if last_gen_position is None:
        return True
    config = config or get_config()
    displacement = float(np.linalg.norm(np.asarray(robot.position) - np.asarray(last_gen_position)))
    return displacement >= config.gen_spacing(robot.sensor_range)
