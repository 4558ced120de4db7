"""
Frontier Clustering
Spectral clustering on a frontier similarity built from tangential distance,
normal-plane distance and normal difference.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from sklearn.cluster import KMeans

from apps.core.conf import get_config

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class FrontierCluster:
    """Frontier meshes served by one viewpoint. Id is the smallest member id."""

    id: int
    members: tuple
    center: np.ndarray
    normal: np.ndarray

    @classmethod
    def from_frontiers(cls, frontiers):
        frontiers = sorted(frontiers, key=lambda f: f.id)
        center, normal = cluster_geometry(frontiers)
        return cls(id=frontiers[0].id, members=tuple(f.id for f in frontiers), center=center, normal=normal)

    def __len__(self):
        return len(self.members)


def cluster_geometry(frontiers):
    """Mean center and renormalised mean normal of member frontiers."""
    center = np.mean([f.center for f in frontiers], axis=0)
    normal = np.mean([f.normal for f in frontiers], axis=0)
    norm = np.linalg.norm(normal)
    if norm > 1e-12:
        normal = normal / norm
    return center, normal


def pair_distance(c_i, n_i, c_j, n_j, weights=(1.0, 1.0, 2.0)):
    """Weighted frontier distance of F_i measured in F_j's frame (asymmetric)."""
    diff = np.asarray(c_i) - np.asarray(c_j)
    tangential = abs(float(np.dot(diff, n_j)))
    normal_plane = float(np.linalg.norm(np.cross(diff, n_j)))
    normal_diff = float(np.linalg.norm((np.asarray(n_i) - np.asarray(n_j)) / 2))
    w1, w2, w3 = weights
    return w1 * tangential + w2 * normal_plane + w3 * normal_diff


def distance_matrix(centers, normals, weights):
    """Symmetrised pairwise distance; zero on the diagonal."""
    diff = centers[:, None, :] - centers[None, :, :]
    tangential = np.abs(np.einsum('ijk,jk->ij', diff, normals))
    normal_plane = np.linalg.norm(np.cross(diff, normals[None, :, :]), axis=2)
    normal_diff = np.linalg.norm(normals[:, None, :] - normals[None, :, :], axis=2) / 2
    w1, w2, w3 = weights
    s = w1 * tangential + w2 * normal_plane + w3 * normal_diff
    s = (s + s.T) / 2
    np.fill_diagonal(s, 0.0)
    return s


def similarity_matrix(centers, normals, config=None):
    config = config or get_config()
    weights = (config.cluster_w_tangential, config.cluster_w_normal, config.cluster_w_normal_diff)
    s = distance_matrix(centers, normals, weights)
    return np.exp(-s ** 2 / (2 * config.cluster_sigma ** 2))


def _sign_fix(vectors):
    """Make the largest-magnitude entry of each eigenvector positive."""
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _extent(centers):
    return float(np.linalg.norm(centers - centers.mean(axis=0), axis=1).max())


class SpectralFrontierClustering:
    """
    Clusters a batch of frontiers. Components of the kNN graph are handled apart,
    cluster count comes from the eigengap and oversize clusters are split until
    their extent fits under the cap.
    """

    def __init__(self, config=None, sensor_range=10.0, seed=0):
        self.config = config or get_config()
        self.extent_max = self.config.cluster_extent_max(sensor_range)
        self.seed = seed

    def _kmeans(self, data, k):
        return KMeans(n_clusters=k, n_init=10, random_state=self.seed).fit(data).labels_

    def _affinity(self, centers, normals):
        n = len(centers)
        similarity = similarity_matrix(centers, normals, self.config)
        k = min(self.config.cluster_knn + 1, n)
        _, neighbours = cKDTree(centers).query(centers, k=k)
        neighbours = np.asarray(neighbours).reshape(n, -1)
        adjacency = np.zeros((n, n), dtype=bool)
        adjacency[np.repeat(np.arange(n), neighbours.shape[1]), neighbours.ravel()] = True
        adjacency |= adjacency.T
        np.fill_diagonal(adjacency, False)
        return np.where(adjacency, np.maximum(similarity, 1e-12), 0.0)

    def _spectral_labels(self, weights, min_k=1):
        n = len(weights)
        degree = weights.sum(axis=1)
        inv_sqrt = 1.0 / np.sqrt(np.maximum(degree, 1e-300))
        laplacian = np.eye(n) - inv_sqrt[:, None] * weights * inv_sqrt[None, :]
        values, vectors = linalg.eigh(laplacian)
        k_cap = min(self.config.cluster_max_eigen, n)
        if k_cap <= 1:
            return np.zeros(n, dtype=int)
        gaps = np.diff(values[:k_cap])
        k = int(np.argmax(gaps)) + 1
        k = max(k, min_k)
        if k <= 1:
            return np.zeros(n, dtype=int)
        embedding = _sign_fix(vectors[:, :k])
        norms = np.linalg.norm(embedding, axis=1, keepdims=True)
        embedding = embedding / np.maximum(norms, 1e-12)
        return self._kmeans(embedding, k)

    def _split(self, indices, centers, normals, weights, depth=0):
        """Recursively split a group until every part satisfies the extent cap."""
        if len(indices) <= 1 or _extent(centers[indices]) <= self.extent_max:
            return [indices]
        sub = weights[np.ix_(indices, indices)]
        labels = self._spectral_labels(sub, min_k=2) if len(indices) > 2 else np.arange(len(indices))
        if len(set(labels)) < 2:
            labels = self._kmeans(centers[indices], 2)
        if len(set(labels)) < 2:
            # coincident centers: halve by id order
            labels = (np.arange(len(indices)) >= len(indices) // 2).astype(int)
        parts = []
        for label in sorted(set(labels)):
            parts.extend(self._split(indices[labels == label], centers, normals, weights, depth + 1))
        return parts

    def _cluster_batch(self, centers, normals):
        n = len(centers)
        if n == 1:
            return [np.array([0])]
        weights = self._affinity(centers, normals)
        n_components, component = connected_components(csr_matrix(weights), directed=False)
        groups = []
        for c in range(n_components):
            indices = np.flatnonzero(component == c)
            if len(indices) > 2:
                labels = self._spectral_labels(weights[np.ix_(indices, indices)])
            else:
                labels = np.zeros(len(indices), dtype=int)
            for label in sorted(set(labels)):
                groups.extend(self._split(indices[labels == label], centers, normals, weights))
        return groups

    def fit(self, frontiers):
        frontiers = sorted(frontiers, key=lambda f: f.id)
        if not frontiers:
            return []
        centers = np.array([f.center for f in frontiers])
        normals = np.array([f.normal for f in frontiers])

        batches = [np.arange(len(frontiers))]
        batch_max = self.config.cluster_batch_max
        if len(frontiers) > batch_max:
            k = int(math.ceil(len(frontiers) / batch_max))
            labels = self._kmeans(centers, k)
            batches = [np.flatnonzero(labels == label) for label in range(k)]

        clusters = []
        pending = list(batches)
        while pending:
            batch = pending.pop(0)
            if len(batch) > batch_max:
                labels = self._kmeans(centers[batch], 2)
                if len(set(labels)) == 2:
                    pending.extend(batch[labels == label] for label in (0, 1))
                    continue
            for group in self._cluster_batch(centers[batch], normals[batch]):
                clusters.append(FrontierCluster.from_frontiers([frontiers[i] for i in batch[group]]))

        clusters.sort(key=lambda fc: fc.id)
        logger.debug(f'Clustered {len(frontiers)} frontiers into {len(clusters)} clusters')
        return clusters


def cluster_frontiers(frontiers, config=None, sensor_range=10.0, seed=0):
    """Partition frontiers into clusters; a single frontier yields one singleton cluster."""
    return SpectralFrontierClustering(config, sensor_range, seed).fit(frontiers)
