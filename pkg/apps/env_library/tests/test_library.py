import math
import os
import tempfile

import numpy as np
from django.test import SimpleTestCase

from apps.bench_harness.oracles import frontier_violations, merge_soundness_violations
from apps.core.conf import get_config
from apps.core.exceptions import CodecError, ProtocolFault
from apps.env_library.codec import HEADER, deserialize, serialize
from apps.env_library.ledger import ByteLedger
from apps.env_library.library import EnvironmentLibrary
from apps.star_convex.polytope import build_polytope
from apps.star_convex.sampling import sample_frame
from apps.world_sim.robots import RobotState
from apps.world_sim.world import VoxelWorld

SENSOR_RANGE = 6.0


def corridor_world():
    world = VoxelWorld.empty((20.0, 10.0, 3.0), 0.5)
    world.fill_box([9.0, 0.0, 0.0], [10.0, 4.0, 3.0])
    return world


def observe_at(library, world, position):
    robot = RobotState(id=library.owner, position=position, sensor_range=SENSOR_RANGE,
                       fov_v=math.radians(40.0))
    samples = sample_frame(world, robot, library.config)
    polytope = build_polytope(samples, robot.position, library.config.flip_radius(SENSOR_RANGE),
                              library.next_polytope_id())
    return library.observe(polytope)


class LibraryTestCase(SimpleTestCase):

    def setUp(self):
        self.config = get_config(sampler_azimuth_step_deg=15.0)
        self.world = corridor_world()
        self.first = EnvironmentLibrary(0, SENSOR_RANGE, self.config)
        self.second = EnvironmentLibrary(1, SENSOR_RANGE, self.config)
        for position in ([3.25, 6.25, 1.25], [6.25, 6.25, 1.25]):
            observe_at(self.first, self.world, position)
        for position in ([13.25, 6.25, 1.25], [16.25, 6.25, 1.25]):
            observe_at(self.second, self.world, position)

    def library(self, owner):
        return EnvironmentLibrary(owner, SENSOR_RANGE, self.config)


class ObserveTests(LibraryTestCase):

    def test_observe_builds_frontiers_clusters_and_svps(self):
        self.assertEqual(len(self.first.polytopes), 2)
        self.assertTrue(self.first.live_frontier_ids())
        clustered = sorted(m for fc in self.first.clusters.values() for m in fc.members)
        self.assertEqual(clustered, self.first.live_frontier_ids())
        self.assertTrue(self.first.svps)

    def test_no_live_frontier_is_inside_another_polytope(self):
        self.assertEqual(frontier_violations(self.first), 0)

    def test_version_vector_tracks_sequences(self):
        self.assertEqual(self.first.version_vector(), {0: 1})
        self.assertEqual(self.first.checkpoint().as_dict(), {0: 1})

    def test_svp_targets_are_known_free(self):
        for svp in self.first.svps:
            self.assertTrue(self.first.contains(svp.target[None, :])[0])

    def test_retiring_a_cluster_removes_its_members(self):
        fc_id = sorted(self.first.clusters)[0]
        members = set(self.first.clusters[fc_id].members)
        robot = RobotState(id=0, position=[6.25, 6.75, 1.25], sensor_range=SENSOR_RANGE, fov_v=math.radians(40.0))
        frame = build_polytope(sample_frame(self.world, robot, self.config), robot.position,
                               self.config.flip_radius(SENSOR_RANGE), self.first.next_polytope_id())
        stored = self.first.observe(frame, retire_clusters=[fc_id])
        self.assertTrue(set(stored.retired) <= members)
        self.assertFalse(members & set(self.first.live_frontier_ids()))

    def test_sealing_frame_empties_the_frontier_set_everywhere(self):
        self.first.merge([(1, serialize(self.second))])
        peer = EnvironmentLibrary.from_stream(serialize(self.first), 1, sensor_range=SENSOR_RANGE,
                                              config=self.config)
        self.assertTrue(self.first.live_frontier_ids())
        robot = RobotState(id=0, position=[6.25, 6.25, 1.25], sensor_range=SENSOR_RANGE, fov_v=math.radians(40.0))
        frame = build_polytope(sample_frame(self.world, robot, self.config), robot.position,
                               self.config.flip_radius(SENSOR_RANGE), self.first.next_polytope_id())
        self.first.seal(frame)
        self.assertEqual(self.first.live_frontier_ids(), [])
        self.assertEqual((self.first.clusters, self.first.svps), ({}, []))
        peer.merge([(0, serialize(self.first))])
        self.assertEqual(peer.live_frontier_ids(), [])


class MergeTests(LibraryTestCase):

    def test_merge_is_idempotent(self):
        stream = serialize(self.second)
        self.first.merge([(1, stream)])
        once = self.first.fingerprint()
        report = self.first.merge([(1, stream)])
        self.assertEqual(self.first.fingerprint(), once)
        self.assertEqual(report.added_polytopes, 0)

    def test_merge_order_does_not_matter(self):
        a, b = serialize(self.first), serialize(self.second)
        forward, backward = self.library(9), self.library(9)
        forward.merge([(0, a), (1, b)])
        backward.merge([(1, b), (0, a)])
        self.assertEqual(forward.fingerprint(), backward.fingerprint())

    def test_merge_unions_polytopes_and_stays_sound(self):
        report = self.first.merge([(1, serialize(self.second))])
        self.assertEqual(len(self.first.polytopes), 4)
        self.assertEqual(report.added_polytopes, 2)
        self.assertEqual(frontier_violations(self.first), 0)
        self.assertEqual(report.received_bytes, {1: len(serialize(self.second))})
        self.assertEqual(sorted(report.deleted + report.surviving), report.inputs)

    def test_random_merges_stay_sound(self):
        self.assertEqual(merge_soundness_violations(np.random.default_rng(3), config=self.config), 0)

    def test_conflicting_polytope_content_is_a_protocol_fault(self):
        impostor = self.library(1)
        observe_at(impostor, self.world, [2.25, 2.25, 1.25])
        self.first.merge([(1, serialize(self.second))])
        with self.assertRaises(ProtocolFault):
            self.first.merge([(1, serialize(impostor))])

    def test_from_stream_adopts_sender_clusters(self):
        copy = EnvironmentLibrary.from_stream(serialize(self.first), 5, sensor_range=SENSOR_RANGE,
                                              config=self.config)
        self.assertEqual(copy.live_frontier_ids(), self.first.live_frontier_ids())
        self.assertEqual(
            sorted(fc.members for fc in copy.clusters.values()),
            sorted(fc.members for fc in self.first.clusters.values()),
        )


class DeltaTests(LibraryTestCase):

    def test_synced_peer_gets_an_empty_delta(self):
        self.first.mark_synced(1)
        payload = self.first.serialize_for(1)
        self.assertEqual(len(payload), HEADER.size)
        self.assertEqual(deserialize(payload).polytopes, [])

    def test_delta_carries_only_new_frames(self):
        self.first.mark_synced(1)
        observe_at(self.first, self.world, [5.25, 8.25, 1.25])
        delta = deserialize(self.first.serialize_for(1))
        self.assertEqual([p.seq for p in delta.polytopes], [2])

    def test_unknown_peer_gets_a_full_snapshot(self):
        self.assertEqual(len(deserialize(self.first.serialize_for(7)).polytopes), 2)

    def test_bad_streams_raise(self):
        payload = serialize(self.first)
        with self.assertRaises(CodecError):
            deserialize(b'XLIB' + payload[4:])
        with self.assertRaises(CodecError):
            deserialize(payload + b'\x00')
        with self.assertRaises(CodecError):
            deserialize(payload[:5])


class ByteLedgerTests(SimpleTestCase):

    def test_totals_per_undirected_link(self):
        ledger = ByteLedger()
        ledger.record(1.0, 0, 1, 100)
        ledger.record(1.0, 1, 0, 50)
        ledger.record(2.0, 2, 1, 10)
        self.assertEqual(ledger.total, 160)
        self.assertEqual(ledger.per_link(), {'0-1': 150, '1-2': 10})

    def test_csv_export(self):
        ledger = ByteLedger()
        ledger.record(0.5, 3, 4, 12)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'bytes.csv')
            ledger.write_csv(path)
            with open(path) as handle:
                self.assertEqual(handle.read().splitlines(), ['t,from,to,bytes', '0.500,3,4,12'])
