"""
Star-Convex Polytopes
Sphere flipping plus a convex hull turns one frame's samples into a star-shaped
mesh about the robot position.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from apps.core.exceptions import DegenerateHullError, FlipDomainError
from .sampling import TAG_OBS

logger = logging.getLogger(__name__)

MEMBERSHIP_EPS = 1e-9
POLYTOPE_ID_STRIDE = 1_000_000
_CHUNK = 256


def make_polytope_id(robot_id, seq):
    return int(robot_id) * POLYTOPE_ID_STRIDE + int(seq)


def split_polytope_id(polytope_id):
    return divmod(int(polytope_id), POLYTOPE_ID_STRIDE)


def quantize(values):
    """Round-trip through float32 so in-memory geometry equals the wire geometry."""
    return np.asarray(values, dtype=np.float32).astype(np.float64)


def flip(points, origin, radius):
    """
    Radial sphere flip about `origin`: a point at distance d maps to distance 2r - d
    along the same direction. Defined for 0 < d < 2r, where it is an involution.
    """
    points = np.asarray(points, dtype=float)
    origin = np.asarray(origin, dtype=float)
    offsets = points - origin
    distances = np.linalg.norm(offsets, axis=-1, keepdims=True)
    if np.any(distances <= 0.0):
        raise FlipDomainError('Cannot flip the flip center itself.')
    if np.any(distances >= 2 * radius):
        raise FlipDomainError(f'Point beyond twice the flip radius {radius}.')
    return origin + offsets * ((2 * radius - distances) / distances)


def tetra_membership(offsets, inverses):
    """
    Barycentric test of offsets (P, 3) against tetrahedra given by the inverses (P, 3, 3)
    of their edge matrices [a - O, b - O, c - O]. Boundary counts as inside.
    """
    lam = np.einsum('pij,pj->pi', inverses, offsets)
    return np.all(lam >= -MEMBERSHIP_EPS, axis=1) & (lam.sum(axis=1) <= 1.0 + MEMBERSHIP_EPS)


@dataclass(eq=False)
class StarPolytope:
    """
    One frame of free space. Vertex tags are TAG_FREE/TAG_OBS; meshes are
    outward-oriented vertex index triplets. `retired` lists frontier ids the frame
    closed without geometrically covering them.
    """

    id: int
    origin: np.ndarray
    flip_radius: float
    vertices: np.ndarray
    tags: np.ndarray
    meshes: np.ndarray
    retired: tuple = field(default_factory=tuple)

    @property
    def robot_id(self):
        return split_polytope_id(self.id)[0]

    @property
    def seq(self):
        return split_polytope_id(self.id)[1]

    @property
    def max_extent(self):
        return float(np.linalg.norm(self.vertices - self.origin, axis=1).max())

    @cached_property
    def tetra_inverse(self):
        """(F, 3, 3) inverses of the origin-apex tetrahedra; NaN rows for flat ones."""
        edges = self.vertices[self.meshes] - self.origin
        matrices = np.transpose(edges, (0, 2, 1))
        det = np.linalg.det(matrices)
        scale = np.linalg.norm(edges, axis=2).prod(axis=1)
        valid = np.abs(det) > 1e-12 * np.maximum(scale, 1e-300)
        inverse = np.full_like(matrices, np.nan)
        if valid.any():
            inverse[valid] = np.linalg.inv(matrices[valid])
        return inverse

    @cached_property
    def tetra_valid(self):
        return ~np.isnan(self.tetra_inverse[:, 0, 0])

    def mesh_corners(self):
        return self.vertices[self.meshes]

    def contains(self, points):
        """Brute-force membership of (N, 3) points over every tetrahedron."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        inverse = self.tetra_inverse[self.tetra_valid]
        result = np.zeros(len(points), dtype=bool)
        offsets = points - self.origin
        at_origin = np.linalg.norm(offsets, axis=1) == 0.0
        for start in range(0, len(points), _CHUNK):
            chunk = offsets[start:start + _CHUNK]
            lam = np.einsum('fij,nj->nfi', inverse, chunk)
            inside = np.all(lam >= -MEMBERSHIP_EPS, axis=2) & (lam.sum(axis=2) <= 1.0 + MEMBERSHIP_EPS)
            result[start:start + _CHUNK] = inside.any(axis=1)
        return result | at_origin

    def same_content(self, other):
        return (
            self.id == other.id
            and np.array_equal(self.origin, other.origin)
            and float(np.float32(self.flip_radius)) == float(np.float32(other.flip_radius))
            and np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.tags, other.tags)
            and np.array_equal(self.meshes, other.meshes)
            and tuple(self.retired) == tuple(other.retired)
        )

    def with_retired(self, frontier_ids):
        return StarPolytope(
            id=self.id,
            origin=self.origin,
            flip_radius=self.flip_radius,
            vertices=self.vertices,
            tags=self.tags,
            meshes=self.meshes,
            retired=tuple(sorted(set(self.retired) | set(int(f) for f in frontier_ids))),
        )

    def __repr__(self):
        return f'StarPolytope(id={self.id}, vertices={len(self.vertices)}, meshes={len(self.meshes)})'


def _canonical_facets(simplices, flipped, normals):
    facets = []
    for simplex, normal in zip(simplices, normals):
        a, b, c = (int(i) for i in simplex)
        if np.dot(np.cross(flipped[b] - flipped[a], flipped[c] - flipped[a]), normal) < 0:
            b, c = c, b
        # rotate so the smallest index leads, keeping the cyclic orientation
        triple = [a, b, c]
        k = triple.index(min(triple))
        facets.append(tuple(triple[k:] + triple[:k]))
    return sorted(facets)


def build_polytope(samples, origin, radius, polytope_id=0):
    """
    Flip the frame's samples, hull them together with the viewpoint, and keep
    the un-flipped hull vertices with their free/obs tags.
    """
    points = samples.star
    tags = samples.tags
    origin = quantize(origin)
    if len(points) < 4:
        raise DegenerateHullError(polytope_id, f'Frame {polytope_id} has only {len(points)} samples.')

    flipped = flip(points, origin, radius)
    augmented = np.vstack([flipped, origin])
    try:
        hull = ConvexHull(augmented)
    except QhullError as exc:
        raise DegenerateHullError(polytope_id, f'Degenerate hull for frame {polytope_id}: {str(exc).splitlines()[0]}')

    facets = _canonical_facets(hull.simplices, augmented, hull.equations[:, :3])
    used = sorted({i for facet in facets for i in facet})
    remap = {old: new for new, old in enumerate(used)}
    origin_index = len(points)

    vertices = np.array([origin if i == origin_index else points[i] for i in used], dtype=float)
    vertex_tags = np.array([TAG_OBS if i == origin_index else tags[i] for i in used], dtype=np.uint8)
    meshes = np.array([[remap[i] for i in facet] for facet in facets], dtype=np.int64)

    polytope = StarPolytope(
        id=int(polytope_id),
        origin=origin,
        flip_radius=float(np.float32(radius)),
        vertices=quantize(vertices),
        tags=vertex_tags,
        meshes=meshes,
    )
    logger.debug(f'Built {polytope!r} from {len(points)} samples')
    return polytope
