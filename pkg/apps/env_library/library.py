"""
Environment Library
A robot's polytopes and SFI. Frontier liveness is a pure function of the
polytope set (covered by a non-parent polytope, or retired by one), which
keeps merges idempotent and order-independent.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from apps.core.conf import get_config
from apps.core.exceptions import ProtocolFault
from apps.frontier_sfi.clustering import FrontierCluster, cluster_frontiers
from apps.frontier_sfi.codec import ClusterRecord, SuperViewpointRecord
from apps.frontier_sfi.frontiers import OriginIndex, covered_mask, extract_frontiers, frontier_parent
from apps.frontier_sfi.mesh_table import MeshTable
from apps.frontier_sfi.viewpoints import Viewpoint, gen_super_viewpoints, gen_viewpoint
from apps.star_convex.polytope import make_polytope_id, split_polytope_id
from .codec import Checkpoint, deserialize, serialize

logger = logging.getLogger(__name__)

_CLEARANCE_OFFSETS = np.array([
    [0, 0, 0], [1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1],
], dtype=float)


@dataclass
class MergeReport:
    received_bytes: dict = field(default_factory=dict)
    deleted: list = field(default_factory=list)
    surviving: list = field(default_factory=list)
    svps: list = field(default_factory=list)
    added_polytopes: int = 0

    @property
    def inputs(self):
        return sorted(set(self.deleted) | set(self.surviving))


class EnvironmentLibrary:
    """
    Polytopes keyed by id (robot-id prefixed), every live frontier, the clusters
    partitioning them, one viewpoint per cluster (None when viewpoint-less) and the
    super viewpoints derived from those viewpoints.
    """

    def __init__(self, owner, sensor_range=10.0, config=None, seed=0, tables=None):
        self.owner = int(owner)
        self.sensor_range = float(sensor_range)
        self.config = config or get_config()
        self.seed = seed
        self.polytopes = {}
        self.provenance = {}
        self.frontiers = {}
        self.dead = set()
        self.retired = set()
        self.clusters = {}
        self.assignment = {}
        self.viewpoints = {}
        self.cluster_revision = {}
        self.svps = []
        self.revision = 0
        self.peer_checkpoints = {}
        self.mesh_tables = {} if tables is None else tables
        self._origin_index = None
        self._next_seq = 0

    # Queries

    @property
    def origin_index(self):
        if self._origin_index is None:
            self._origin_index = OriginIndex(self.sorted_polytopes())
        return self._origin_index

    def sorted_polytopes(self):
        return [self.polytopes[pid] for pid in sorted(self.polytopes)]

    def live_frontier_ids(self):
        return sorted(self.frontiers)

    def live_frontiers(self):
        return [self.frontiers[fid] for fid in sorted(self.frontiers)]

    def mesh_table(self, polytope):
        table = self.mesh_tables.get(polytope.id)
        if table is None:
            table = self.mesh_tables[polytope.id] = MeshTable(polytope, self.config.mesh_table_cell_deg)
        return table

    def contains(self, points):
        """Membership of (N, 3) points in the union of all polytopes."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return covered_mask(points, [-1] * len(points), self.origin_index, self.mesh_tables)

    def is_free(self, points):
        """Known-free test with an axis-aligned clearance margin around each point."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        around = (points[:, None, :] + self.config.vp_clearance * _CLEARANCE_OFFSETS[None, :, :]).reshape(-1, 3)
        return self.contains(around).reshape(len(points), len(_CLEARANCE_OFFSETS)).all(axis=1)

    def version_vector(self):
        vector = {}
        for pid in self.polytopes:
            robot_id, seq = split_polytope_id(pid)
            vector[robot_id] = max(vector.get(robot_id, -1), seq)
        return vector

    def checkpoint(self):
        return Checkpoint.from_vector(self.version_vector(), self.revision)

    def svp_keys(self):
        return {svp.key for svp in self.svps}

    def viewpoint_of(self, fc_id):
        return self.viewpoints.get(fc_id)

    def orphan_ids(self):
        return sorted(fc_id for fc_id, vp in self.viewpoints.items() if vp is None)

    def fingerprint(self):
        polytopes = tuple(
            (p.id, p.origin.tobytes(), p.vertices.tobytes(), p.tags.tobytes(), p.meshes.tobytes(), p.retired)
            for p in self.sorted_polytopes()
        )
        clusters = tuple(
            (fc.id, fc.members, None if self.viewpoints[fc.id] is None else self.viewpoints[fc.id].position.tobytes())
            for fc in sorted(self.clusters.values(), key=lambda c: c.id)
        )
        svps = tuple((svp.members, svp.position.tobytes()) for svp in self.svps)
        return polytopes, tuple(self.live_frontier_ids()), clusters, svps

    # Local frames

    def next_polytope_id(self):
        polytope_id = make_polytope_id(self.owner, self._next_seq)
        self._next_seq += 1
        return polytope_id

    def observe(self, polytope, retire_clusters=()):
        """
        Add an own frame. Live members of `retire_clusters` that the frame does not
        cover are retired with it, so the retirement travels with the polytope.
        """
        retire = []
        for fc_id in sorted(retire_clusters):
            cluster = self.clusters.get(fc_id)
            if cluster is not None:
                retire.extend(m for m in cluster.members if m in self.frontiers)
        if retire:
            centers = np.array([self.frontiers[m].center for m in retire])
            covered = self.mesh_table(polytope).contains(centers)
            uncovered = [m for m, c in zip(retire, covered) if not c]
            if uncovered:
                polytope = polytope.with_retired(uncovered)
        added, killed = self._ingest([polytope])
        self._refresh(added, killed)
        return polytope

    def seal(self, polytope):
        """
        Add an own frame that retires every live frontier, its own included. Any
        library that merges it ends with an empty frontier set as well.
        """
        own = [frontier.id for frontier in extract_frontiers(polytope)]
        polytope = polytope.with_retired(sorted(self.frontiers) + own)
        added, killed = self._ingest([polytope])
        self._refresh(added, killed)
        logger.info(f'Robot {self.owner}: sealed {len(killed)} frontiers with polytope {polytope.id}')
        return polytope

    # Ingestion

    def _ingest(self, polytopes):
        added = []
        for polytope in sorted(polytopes, key=lambda p: p.id):
            existing = self.polytopes.get(polytope.id)
            if existing is not None:
                if not existing.same_content(polytope):
                    raise ProtocolFault(f'Polytope id {polytope.id} received with different content.',
                                        polytope_id=polytope.id)
                continue
            self.polytopes[polytope.id] = polytope
            self.provenance[polytope.id] = polytope.robot_id
            self.retired.update(polytope.retired)
            added.append(polytope)
        if not added:
            return [], set()
        self._origin_index = None

        killed = set()
        # newly retired ids among already-live frontiers
        for fid in sorted(set(self.frontiers) & self.retired):
            killed.add(fid)

        new_frontiers = []
        for polytope in added:
            for frontier in extract_frontiers(polytope):
                if frontier.id in self.retired:
                    self.dead.add(frontier.id)
                    continue
                new_frontiers.append(frontier)

        old = [f for fid, f in sorted(self.frontiers.items()) if fid not in killed]
        if old:
            covered = covered_mask(
                np.array([f.center for f in old]), [f.polytope_id for f in old],
                OriginIndex(added), self.mesh_tables,
            )
            killed.update(f.id for f, c in zip(old, covered) if c)

        if new_frontiers:
            covered = covered_mask(
                np.array([f.center for f in new_frontiers]), [f.polytope_id for f in new_frontiers],
                self.origin_index, self.mesh_tables,
            )
            for frontier, c in zip(new_frontiers, covered):
                if c:
                    self.dead.add(frontier.id)
                else:
                    self.frontiers[frontier.id] = frontier

        for fid in killed:
            self.frontiers.pop(fid, None)
            self.dead.add(fid)
        return added, killed

    # SFI maintenance

    def _drop_cluster(self, fc_id):
        cluster = self.clusters.pop(fc_id)
        for member in cluster.members:
            if self.assignment.get(member) == fc_id:
                del self.assignment[member]
        self.viewpoints.pop(fc_id, None)
        self.cluster_revision.pop(fc_id, None)

    def _add_cluster(self, cluster, viewpoint):
        self.clusters[cluster.id] = cluster
        for member in cluster.members:
            self.assignment[member] = cluster.id
        self.viewpoints[cluster.id] = viewpoint
        self.cluster_revision[cluster.id] = self.revision

    def _adopt(self, records, prefer_incoming):
        adopted = 0
        for record in sorted(records, key=lambda r: min(r.members) if r.members else -1):
            members = record.members
            if not members or any(m not in self.frontiers for m in members):
                continue
            claimed = sorted({self.assignment[m] for m in members if m in self.assignment})
            if claimed:
                if not prefer_incoming:
                    continue
                for fc_id in claimed:
                    self._drop_cluster(fc_id)
            cluster = FrontierCluster.from_frontiers([self.frontiers[m] for m in members])
            viewpoint = None
            if record.viewpoint is not None:
                viewpoint = Viewpoint(fc_id=cluster.id, position=record.viewpoint)
            self._add_cluster(cluster, viewpoint)
            adopted += 1
        return adopted

    def _refresh(self, added, killed, records=(), prefer_incoming=False):
        self.revision += 1

        for fc_id in sorted({self.assignment[f] for f in killed if f in self.assignment}):
            self._drop_cluster(fc_id)
        for fid in killed:
            self.assignment.pop(fid, None)

        if records:
            self._adopt(records, prefer_incoming)

        unclaimed = [f for fid, f in sorted(self.frontiers.items()) if fid not in self.assignment]
        fresh = set()
        if unclaimed:
            for cluster in cluster_frontiers(unclaimed, self.config, self.sensor_range, self.seed):
                viewpoint = gen_viewpoint(cluster, self.is_free, self.config, self.sensor_range)
                if viewpoint is None:
                    logger.debug(f'Library {self.owner}: cluster {cluster.id} is viewpoint-less')
                self._add_cluster(cluster, viewpoint)
                fresh.add(cluster.id)

        if added:
            origins = np.array([p.origin for p in added])
            radii = np.array([p.flip_radius for p in added])
            for fc_id in self.orphan_ids():
                if fc_id in fresh:
                    continue
                cluster = self.clusters[fc_id]
                if np.any(np.linalg.norm(origins - cluster.center, axis=1) <= radii):
                    viewpoint = gen_viewpoint(cluster, self.is_free, self.config, self.sensor_range)
                    if viewpoint is not None:
                        self.viewpoints[fc_id] = viewpoint
                        self.cluster_revision[fc_id] = self.revision

        self._rebuild_svps()

    def _rebuild_svps(self):
        viewpoints = [vp for vp in self.viewpoints.values() if vp is not None]
        self.svps = gen_super_viewpoints(viewpoints, self.config.svp_radius(self.sensor_range), self.contains)

    # Wire

    def _record(self, fc_id):
        cluster = self.clusters[fc_id]
        viewpoint = self.viewpoints.get(fc_id)
        return ClusterRecord(
            members=cluster.members,
            center=cluster.center,
            normal=cluster.normal,
            viewpoint=None if viewpoint is None else viewpoint.position,
        )

    def sfi_records(self, newer_than=-1):
        """SFI touched after revision `newer_than`, as wire records."""
        svp_records = []
        for svp in self.svps:
            if any(self.cluster_revision.get(m, -1) > newer_than for m in svp.members):
                svp_records.append(SuperViewpointRecord(
                    position=svp.position,
                    clusters=tuple(self._record(m) for m in svp.members),
                ))
        orphans = [self._record(fc_id) for fc_id in self.orphan_ids()
                   if self.cluster_revision.get(fc_id, -1) > newer_than]
        return svp_records, orphans

    def serialize_for(self, peer):
        """Delta for `peer` since the last recorded sync; full snapshot for unknown peers."""
        return serialize(self, self.peer_checkpoints.get(peer))

    def mark_synced(self, peer):
        self.peer_checkpoints[peer] = self.checkpoint()

    def merge(self, received, prefer_incoming=False):
        """
        Merge streams [(sender, bytes), ...]. Polytopes are unioned by id, stale
        frontiers deleted against the union, and only clusters that lost members
        are re-clustered.
        """
        before = set(self.frontiers)
        report = MergeReport()
        polytopes, records = [], []
        for sender, payload in received:
            report.received_bytes[sender] = report.received_bytes.get(sender, 0) + len(payload)
            delta = deserialize(payload)
            polytopes.extend(delta.polytopes)
            records.extend(delta.cluster_records)

        added, killed = self._ingest(polytopes)
        if added or (records and prefer_incoming):
            self._refresh(added, killed, records, prefer_incoming)

        added_ids = {p.id for p in added}
        inputs = before | {
            fid for fid in (set(self.frontiers) | self.dead)
            if frontier_parent(fid) in added_ids
        }
        after = set(self.frontiers)
        report.deleted = sorted(inputs - after)
        report.surviving = sorted(after & inputs)
        report.svps = list(self.svps)
        report.added_polytopes = len(added)
        if report.deleted:
            logger.debug(f'Library {self.owner}: merge deleted {len(report.deleted)} frontiers')
        return report

    @classmethod
    def from_stream(cls, payload, owner, **kwargs):
        library = cls(owner, **kwargs)
        library.merge([(deserialize(payload).owner, payload)], prefer_incoming=True)
        return library


def merge(host_library, received, prefer_incoming=False):
    """Module-level entry: merge received streams into the host library."""
    return host_library.merge(received, prefer_incoming=prefer_incoming)
