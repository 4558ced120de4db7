"""
MeshTable - rasterised unit sphere indexing a polytope's meshes by direction
"""

import math

import numpy as np

from apps.core.conf import get_config
from apps.star_convex.polytope import tetra_membership

_POLE = np.array([0.0, 0.0, 1.0])


def _spherical(directions):
    azimuth = np.arctan2(directions[..., 1], directions[..., 0])
    inclination = np.arccos(np.clip(directions[..., 2], -1.0, 1.0))
    return azimuth, inclination


def _arc_extreme_z(p, q, axis):
    """z of the point of great-circle arc p->q closest to `axis` (+/-z), or None."""
    normal = np.cross(p, q)
    norm = np.linalg.norm(normal)
    if norm < 1e-15:
        return None
    normal = normal / norm
    e = axis - np.dot(axis, normal) * normal
    e_norm = np.linalg.norm(e)
    if e_norm < 1e-15:
        return None
    e = e / e_norm
    if np.dot(np.cross(p, e), normal) >= 0 and np.dot(np.cross(e, q), normal) >= 0:
        return float(e[2])
    return None


def _cone_contains(corners, axis):
    try:
        weights = np.linalg.solve(corners.T, axis)
    except np.linalg.LinAlgError:
        return False
    return bool(np.all(weights >= -1e-9))


class MeshTable:
    """
    Direction grid (azimuth x inclination cells) listing, per cell, the meshes whose
    spherical bounding box covers it. Boxes are padded by one cell on every side.
    Stored CSR-style: cell ids -> slices of `mesh_ids`.
    """

    def __init__(self, polytope, cell_deg=None):
        cell_deg = cell_deg or get_config().mesh_table_cell_deg
        self.polytope = polytope
        self.cell = math.radians(cell_deg)
        self.n_az = int(round(2 * math.pi / self.cell))
        self.n_inc = int(round(math.pi / self.cell))
        self._build()

    def _cells_for(self, corners):
        az, inc = _spherical(corners)
        n_az, n_inc, cell = self.n_az, self.n_inc, self.cell

        inc_lo, inc_hi = float(inc.min()), float(inc.max())
        full_azimuth = False
        if _cone_contains(corners, _POLE):
            inc_lo, full_azimuth = 0.0, True
        if _cone_contains(corners, -_POLE):
            inc_hi, full_azimuth = math.pi, True
        for a, b in ((0, 1), (1, 2), (2, 0)):
            top = _arc_extreme_z(corners[a], corners[b], _POLE)
            if top is not None:
                inc_lo = min(inc_lo, math.acos(min(max(top, -1.0), 1.0)))
            bottom = _arc_extreme_z(corners[a], corners[b], -_POLE)
            if bottom is not None:
                inc_hi = max(inc_hi, math.acos(min(max(bottom, -1.0), 1.0)))

        inc_cells = np.arange(
            max(int(math.floor(inc_lo / cell)) - 1, 0),
            min(int(math.floor(inc_hi / cell)) + 1, n_inc - 1) + 1,
        )

        if not full_azimuth:
            ordered = np.sort(az)
            gaps = np.diff(np.concatenate([ordered, [ordered[0] + 2 * math.pi]]))
            widest = int(np.argmax(gaps))
            start = ordered[(widest + 1) % 3]
            span = 2 * math.pi - gaps[widest]
            full_azimuth = span > math.pi / 2
        if full_azimuth:
            az_cells = np.arange(n_az)
        else:
            first = int(math.floor((start + math.pi) / cell)) - 1
            last = int(math.floor((start + span + math.pi) / cell)) + 1
            # wrapping past +pi splits the box in two; the modulo covers both halves
            az_cells = np.unique(np.arange(first, last + 1) % n_az)

        return (inc_cells[:, None] * n_az + az_cells[None, :]).ravel()

    def _build(self):
        polytope = self.polytope
        valid = polytope.tetra_valid
        corners = polytope.vertices[polytope.meshes] - polytope.origin
        lengths = np.linalg.norm(corners, axis=2, keepdims=True)
        directions = corners / np.maximum(lengths, 1e-300)

        cell_ids, mesh_ids = [], []
        for index in np.flatnonzero(valid):
            cells = self._cells_for(directions[index])
            cell_ids.append(cells)
            mesh_ids.append(np.full(len(cells), index, dtype=np.int64))

        n_cells = self.n_az * self.n_inc
        if cell_ids:
            cell_ids = np.concatenate(cell_ids)
            mesh_ids = np.concatenate(mesh_ids)
            order = np.lexsort((mesh_ids, cell_ids))
            cell_ids, mesh_ids = cell_ids[order], mesh_ids[order]
        else:
            cell_ids = np.zeros(0, dtype=np.int64)
            mesh_ids = np.zeros(0, dtype=np.int64)
        self.mesh_ids = mesh_ids
        self.indptr = np.concatenate([[0], np.cumsum(np.bincount(cell_ids, minlength=n_cells))])

    def cell_of(self, directions):
        az, inc = _spherical(directions)
        az_idx = np.minimum(((az + math.pi) / self.cell).astype(np.int64), self.n_az - 1)
        inc_idx = np.minimum((inc / self.cell).astype(np.int64), self.n_inc - 1)
        return inc_idx * self.n_az + az_idx

    def candidates(self, point):
        offset = np.asarray(point, dtype=float) - self.polytope.origin
        norm = np.linalg.norm(offset)
        if norm == 0.0:
            return np.flatnonzero(self.polytope.tetra_valid)
        cell = int(self.cell_of(offset / norm))
        return self.mesh_ids[self.indptr[cell]:self.indptr[cell + 1]]

    def contains(self, points):
        """Batched membership of (N, 3) points; only candidate tetrahedra are tested."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        offsets = points - self.polytope.origin
        norms = np.linalg.norm(offsets, axis=1)
        result = norms == 0.0
        pending = np.flatnonzero(~result)
        if len(pending) == 0:
            return result

        cells = self.cell_of(offsets[pending] / norms[pending, None])
        starts = self.indptr[cells]
        counts = self.indptr[cells + 1] - starts
        total = int(counts.sum())
        if total == 0:
            return result
        pair_point = np.repeat(pending, counts)
        first = np.repeat(starts - np.concatenate([[0], np.cumsum(counts)[:-1]]), counts)
        pair_mesh = self.mesh_ids[first + np.arange(total)]

        inside = tetra_membership(offsets[pair_point], self.polytope.tetra_inverse[pair_mesh])
        hits = np.bincount(pair_point[inside], minlength=len(points)) > 0
        return result | hits


def mesh_in_polytope(center, polytope, table):
    """Whether a frontier center lies in the polytope, via its MeshTable."""
    return bool(table.contains(np.asarray(center, dtype=float)[None, :])[0])
