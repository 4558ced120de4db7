"""
Exploration Roadmap
Graph over polytope origins plus query points. A polytope origin links to every
node inside that polytope (the segment stays inside by star shape); query points
also link to each other when the straight segment stays in known free space.
Points outside every polytope are tethered to the nearest origin.
"""

import heapq
import itertools
import logging
import math

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

logger = logging.getLogger(__name__)

SEGMENT_STEP = 0.25


class Roadmap:
    """Built once per planning call over a library snapshot."""

    def __init__(self, library, step=SEGMENT_STEP, max_segment=None):
        self.library = library
        self.step = step
        self.max_segment = max_segment or library.config.flip_radius(library.sensor_range)
        self.polytopes = library.sorted_polytopes()
        self.origins = np.array([p.origin for p in self.polytopes]).reshape(-1, 3)
        self._origin_edges = None
        self._tree = cKDTree(self.origins) if len(self.origins) else None

    def __len__(self):
        return len(self.origins)

    def _containing(self, points):
        """Per point, indices of polytopes that contain it."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        found = [[] for _ in points]
        near = self.library.origin_index.near(points)
        by_polytope = {}
        for i, indices in enumerate(near):
            for k in indices:
                by_polytope.setdefault(k, []).append(i)
        for k in sorted(by_polytope):
            rows = np.array(by_polytope[k])
            inside = self.library.mesh_table(self.polytopes[k]).contains(points[rows])
            for i in rows[inside]:
                found[i].append(k)
        return found

    @property
    def origin_edges(self):
        if self._origin_edges is None:
            edges = []
            for q, owners in enumerate(self._containing(self.origins)):
                for p in owners:
                    if p != q:
                        edges.append((p, q, float(np.linalg.norm(self.origins[p] - self.origins[q]))))
            self._origin_edges = edges
        return self._origin_edges

    def segment_free(self, a, b):
        """Straight segment a-b sampled at `step` lies in the polytope union."""
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        count = max(int(math.ceil(np.linalg.norm(b - a) / self.step)), 1) + 1
        samples = a + np.linspace(0.0, 1.0, count)[:, None] * (b - a)
        return bool(self.library.contains(samples).all())

    def _point_edges(self, points):
        m = len(self.origins)
        edges = []
        for i, owners in enumerate(self._containing(points)):
            node = m + i
            if owners:
                for p in owners:
                    edges.append((p, node, float(np.linalg.norm(self.origins[p] - points[i]))))
            elif self._tree is not None:
                distance, p = self._tree.query(points[i])
                edges.append((int(p), node, float(distance)))
        for i, j in itertools.combinations(range(len(points)), 2):
            if np.linalg.norm(points[i] - points[j]) > self.max_segment:
                continue
            if self.segment_free(points[i], points[j]):
                edges.append((m + i, m + j, float(np.linalg.norm(points[i] - points[j]))))
        return edges

    def graph(self, points):
        """Sparse undirected adjacency over origins followed by `points`."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        size = len(self.origins) + len(points)
        edges = self.origin_edges + self._point_edges(points)
        if not edges:
            return coo_matrix((size, size)).tocsr(), points
        rows, cols, weights = zip(*edges)
        # zero-length edges would vanish from a sparse matrix
        weights = np.maximum(np.array(weights), 1e-9)
        matrix = coo_matrix((weights, (rows, cols)), shape=(size, size)).tocsr()
        matrix = matrix.maximum(matrix.T)
        return matrix, points

    def distances(self, points):
        """Pairwise shortest roadmap lengths (meters) between `points`; inf when unreachable."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if len(points) == 0:
            return np.zeros((0, 0))
        matrix, points = self.graph(points)
        m = len(self.origins)
        lengths = dijkstra(matrix, directed=False, indices=np.arange(m, m + len(points)))[:, m:]
        same = np.all(points[:, None, :] == points[None, :, :], axis=2)
        lengths[same] = 0.0
        return lengths

    def shortest_path(self, start, goal):
        """A* between two points; returns (waypoints, length) or (None, inf)."""
        start, goal = np.asarray(start, dtype=float), np.asarray(goal, dtype=float)
        if np.array_equal(start, goal):
            return [start], 0.0
        matrix, points = self.graph(np.vstack([start, goal]))
        m = len(self.origins)
        positions = np.vstack([self.origins, points])
        source, target = m, m + 1

        def heuristic(node):
            return float(np.linalg.norm(positions[node] - positions[target]))

        counter = itertools.count()
        open_heap = [(heuristic(source), next(counter), source)]
        g_score = {source: 0.0}
        came_from = {}
        closed = set()
        while open_heap:
            _, _, current = heapq.heappop(open_heap)
            if current == target:
                break
            if current in closed:
                continue
            closed.add(current)
            row = slice(matrix.indptr[current], matrix.indptr[current + 1])
            for neighbour, weight in zip(matrix.indices[row], matrix.data[row]):
                neighbour = int(neighbour)
                tentative = g_score[current] + float(weight)
                if tentative < g_score.get(neighbour, math.inf):
                    g_score[neighbour] = tentative
                    came_from[neighbour] = current
                    heapq.heappush(open_heap, (tentative + heuristic(neighbour), next(counter), neighbour))
        else:
            return None, math.inf

        nodes = [target]
        while nodes[-1] != source:
            nodes.append(came_from[nodes[-1]])
        nodes.reverse()
        waypoints = [positions[n] for n in nodes]
        length = float(sum(np.linalg.norm(b - a) for a, b in zip(waypoints, waypoints[1:])))
        return waypoints, length


def motion_cost(roadmap, p_i, p_j, v_max):
    """Travel time in seconds along the roadmap; inf when unreachable."""
    if np.array_equal(np.asarray(p_i, dtype=float), np.asarray(p_j, dtype=float)):
        return 0.0
    _, length = roadmap.shortest_path(p_i, p_j)
    return length / v_max
