"""
Viewpoints and Super Viewpoints
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from apps.core.conf import get_config
from apps.star_convex.polytope import quantize

logger = logging.getLogger(__name__)

HEIGHT_FACTORS = (0.5, 0.75, 1.0, 1.25, 1.5)
RADIUS_FACTORS = (0.0, 0.25, 0.5)
ANGLE_COUNT = 8


@dataclass(frozen=True, eq=False)
class Viewpoint:
    fc_id: int
    position: np.ndarray


@dataclass(eq=False)
class SuperViewpoint:
    """
    Viewpoints merged within svp_radius. `position` is the member centroid;
    `target` is where a robot drives to, the centroid or the nearest member
    when the centroid is not known to be free.
    """

    id: int
    position: np.ndarray
    members: tuple
    viewpoints: tuple
    target: np.ndarray = None

    def __post_init__(self):
        if self.target is None:
            self.target = self.position

    @property
    def key(self):
        return self.members

    def __repr__(self):
        return f'SuperViewpoint(id={self.id}, members={len(self.members)})'


def _basis(normal):
    helper = np.array([1.0, 0.0, 0.0]) if abs(normal[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(normal, helper)
    u /= np.linalg.norm(u)
    return u, np.cross(normal, u)


def viewpoint_candidates(center, normal, r_opt):
    """Cylinder of candidates about C along N: heights x radii x angles."""
    u, v = _basis(normal)
    candidates = []
    for h in HEIGHT_FACTORS:
        axis_point = center + h * r_opt * normal
        for rf in RADIUS_FACTORS:
            if rf == 0.0:
                candidates.append(axis_point)
                continue
            for a in range(ANGLE_COUNT):
                angle = 2 * math.pi * a / ANGLE_COUNT
                candidates.append(axis_point + rf * r_opt * (math.cos(angle) * u + math.sin(angle) * v))
    return np.array(candidates)


def viewpoint_scores(candidates, center, normal, r_opt, w_theta=1.0, w_r=0.5):
    """Weighted angle error plus range error; lower is better."""
    offsets = np.asarray(candidates, dtype=float) - center
    distances = np.linalg.norm(offsets, axis=1)
    cosines = np.where(distances > 0, offsets @ normal / np.maximum(distances, 1e-300), 1.0)
    d_theta = np.arccos(np.clip(cosines, -1.0, 1.0))
    d_r = np.abs(distances - r_opt)
    return w_theta * d_theta + w_r * d_r


def select_viewpoint(candidates, center, normal, is_free, r_opt, config=None):
    """Lowest-scoring candidate that lies in known free space, or None."""
    config = config or get_config()
    candidates = np.asarray(candidates, dtype=float)
    scores = viewpoint_scores(candidates, center, normal, r_opt, config.vp_w_theta, config.vp_w_r)
    order = np.lexsort((np.arange(len(scores)), scores))
    free = is_free(candidates[order])
    for index, ok in zip(order, free):
        if ok:
            return quantize(candidates[index])
    return None


def gen_viewpoint(fc, is_free, config=None, sensor_range=10.0):
    """
    Viewpoint of a frontier cluster. Returns None for a viewpoint-less cluster
    (degenerate normal or no candidate in known free space).
    """
    config = config or get_config()
    if np.linalg.norm(fc.normal) < 1e-9:
        return None
    r_opt = config.r_opt(sensor_range)
    candidates = viewpoint_candidates(fc.center, fc.normal, r_opt)
    position = select_viewpoint(candidates, fc.center, fc.normal, is_free, r_opt, config)
    if position is None:
        logger.debug(f'Cluster {fc.id} has no free viewpoint candidate')
        return None
    return Viewpoint(fc_id=fc.id, position=position)


def gen_super_viewpoints(viewpoints, svp_radius, is_free=None):
    """
    Greedy agglomeration in fc-id order: a viewpoint joins the first super viewpoint
    whose centroid is within svp_radius and whose members all lie within 2 svp_radius.
    """
    groups = []
    for vp in sorted(viewpoints, key=lambda v: v.fc_id):
        for group in groups:
            centroid = np.mean([m.position for m in group], axis=0)
            if np.linalg.norm(vp.position - centroid) > svp_radius:
                continue
            if all(np.linalg.norm(vp.position - m.position) <= 2 * svp_radius for m in group):
                group.append(vp)
                break
        else:
            groups.append([vp])

    svps = []
    for group in groups:
        centroid = np.mean([m.position for m in group], axis=0)
        target = centroid
        if is_free is not None and not bool(is_free(centroid[None, :])[0]):
            nearest = min(group, key=lambda m: (np.linalg.norm(m.position - centroid), m.fc_id))
            target = nearest.position
        svps.append(SuperViewpoint(
            id=group[0].fc_id,
            position=centroid,
            members=tuple(m.fc_id for m in group),
            viewpoints=tuple(group),
            target=target,
        ))
    return svps
