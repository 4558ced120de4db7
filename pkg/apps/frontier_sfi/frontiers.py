"""
Frontier Meshes - extraction from polytopes and stale-frontier deletion
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from apps.star_convex.sampling import TAG_FREE
from .mesh_table import MeshTable

logger = logging.getLogger(__name__)

MESH_ID_STRIDE = 65536


def make_frontier_id(polytope_id, mesh_index):
    return int(polytope_id) * MESH_ID_STRIDE + int(mesh_index)


def frontier_parent(frontier_id):
    return int(frontier_id) // MESH_ID_STRIDE


@dataclass(frozen=True, eq=False)
class FrontierMesh:
    """A polytope mesh bordering unknown space; the normal faces the observing robot."""

    id: int
    polytope_id: int
    center: np.ndarray
    normal: np.ndarray
    vertices: np.ndarray

    def __repr__(self):
        return f'FrontierMesh(id={self.id}, center={tuple(np.round(self.center, 2))})'


def extract_frontiers(polytope):
    """Meshes with at least one free vertex, normals oriented toward the polytope origin."""
    corners = polytope.vertices[polytope.meshes]
    has_free = np.any(polytope.tags[polytope.meshes] == TAG_FREE, axis=1)
    centers = corners.mean(axis=1)
    normals = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
    lengths = np.linalg.norm(normals, axis=1)
    usable = has_free & (lengths > 1e-12)

    frontiers = []
    for index in np.flatnonzero(usable):
        normal = normals[index] / lengths[index]
        facing = float(np.dot(polytope.origin - centers[index], normal))
        scale = float(np.linalg.norm(polytope.origin - centers[index]))
        if abs(facing) <= 1e-9 * max(scale, 1.0):
            # mesh plane passes through the origin (fov side wall)
            continue
        if facing < 0:
            normal = -normal
        frontiers.append(FrontierMesh(
            id=make_frontier_id(polytope.id, index),
            polytope_id=polytope.id,
            center=centers[index],
            normal=normal,
            vertices=corners[index],
        ))
    return frontiers


class OriginIndex:
    """KD-tree over polytope origins, aligned with `polytopes`."""

    def __init__(self, polytopes):
        self.polytopes = list(polytopes)
        self.radii = np.array([p.flip_radius for p in self.polytopes], dtype=float)
        self.max_radius = float(self.radii.max()) if len(self.radii) else 0.0
        if self.polytopes:
            self.origins = np.array([p.origin for p in self.polytopes])
            self.tree = cKDTree(self.origins)
        else:
            self.origins = np.zeros((0, 3))
            self.tree = None

    def __len__(self):
        return len(self.polytopes)

    def near(self, points):
        """Per point, indices of polytopes whose origin lies within that polytope's radius."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.tree is None:
            return [[] for _ in points]
        found = self.tree.query_ball_point(points, r=self.max_radius)
        result = []
        for point, indices in zip(points, found):
            indices = sorted(indices)
            if indices:
                distances = np.linalg.norm(self.origins[indices] - point, axis=1)
                indices = [i for i, d in zip(indices, distances) if d <= self.radii[i]]
            result.append(indices)
        return result


def covered_mask(centers, parents, origin_index, tables=None, skip=None):
    """
    For each center, whether some non-parent polytope near it contains it.
    `tables` caches MeshTables by polytope id; `skip` is an optional boolean mask.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    covered = np.zeros(len(centers), dtype=bool)
    if len(centers) == 0 or len(origin_index) == 0:
        return covered
    tables = {} if tables is None else tables

    by_polytope = {}
    for i, indices in enumerate(origin_index.near(centers)):
        if skip is not None and skip[i]:
            continue
        for k in indices:
            if origin_index.polytopes[k].id != parents[i]:
                by_polytope.setdefault(k, []).append(i)

    for k in sorted(by_polytope):
        polytope = origin_index.polytopes[k]
        rows = np.array([i for i in by_polytope[k] if not covered[i]], dtype=np.int64)
        if len(rows) == 0:
            continue
        table = tables.get(polytope.id)
        if table is None:
            table = tables[polytope.id] = MeshTable(polytope)
        covered[rows] |= table.contains(centers[rows])
    return covered


def delete_stale(frontiers, polytopes, origin_index=None, tables=None):
    """
    Drop every frontier whose center lies inside a polytope other than its parent,
    searching only polytopes whose origin is within their flip radius of the center.
    """
    if not frontiers:
        return []
    origin_index = origin_index or OriginIndex(polytopes)
    centers = np.array([f.center for f in frontiers])
    parents = [f.polytope_id for f in frontiers]
    covered = covered_mask(centers, parents, origin_index, tables)
    survivors = [f for f, dead in zip(frontiers, covered) if not dead]
    logger.debug(f'delete_stale: {len(frontiers) - len(survivors)} of {len(frontiers)} frontiers removed')
    return survivors
