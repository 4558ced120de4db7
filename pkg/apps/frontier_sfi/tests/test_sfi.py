import numpy as np
from django.test import SimpleTestCase

from apps.core.conf import get_config
from apps.core.exceptions import CodecError
from apps.frontier_sfi.clustering import (
    FrontierCluster, cluster_frontiers, distance_matrix, pair_distance,
)
from apps.frontier_sfi.codec import ClusterRecord, SuperViewpointRecord, decode_sfi, encode_sfi
from apps.frontier_sfi.frontiers import FrontierMesh
from apps.frontier_sfi.viewpoints import (
    Viewpoint, gen_super_viewpoints, gen_viewpoint, viewpoint_candidates,
)


def frontier(frontier_id, center, normal):
    normal = np.asarray(normal, dtype=float)
    return FrontierMesh(
        id=frontier_id,
        polytope_id=0,
        center=np.asarray(center, dtype=float),
        normal=normal / np.linalg.norm(normal),
        vertices=np.zeros((3, 3)),
    )


def all_free(points):
    return np.ones(len(points), dtype=bool)


def none_free(points):
    return np.zeros(len(points), dtype=bool)


class FrontierDistanceTests(SimpleTestCase):

    def test_pair_distance_components(self):
        # offset of 1 along the normal and 2 across it, same normal
        value = pair_distance([1.0, 2.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0])
        self.assertAlmostEqual(value, 1.0 + 2.0)

    def test_opposite_normals_add_the_normal_term(self):
        value = pair_distance([0.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0])
        self.assertAlmostEqual(value, 2.0)

    def test_matrix_is_symmetric_with_zero_diagonal(self):
        rng = np.random.default_rng(2)
        centers = rng.normal(size=(6, 3))
        normals = rng.normal(size=(6, 3))
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        s = distance_matrix(centers, normals, (1.0, 1.0, 2.0))
        np.testing.assert_allclose(s, s.T)
        np.testing.assert_allclose(np.diag(s), 0.0)


class ClusteringTests(SimpleTestCase):

    def setUp(self):
        rng = np.random.default_rng(8)
        left = [frontier(i, rng.uniform(-0.5, 0.5, size=3), [1.0, 0.0, 0.0]) for i in range(10)]
        right = [frontier(100 + i, [10.0, 0.0, 0.0] + rng.uniform(-0.5, 0.5, size=3), [-1.0, 0.0, 0.0])
                 for i in range(10)]
        self.frontiers = left + right

    def test_clusters_partition_the_frontiers(self):
        clusters = cluster_frontiers(self.frontiers, sensor_range=10.0)
        members = sorted(m for fc in clusters for m in fc.members)
        self.assertEqual(members, sorted(f.id for f in self.frontiers))

    def test_separated_groups_never_share_a_cluster(self):
        clusters = cluster_frontiers(self.frontiers, sensor_range=10.0)
        self.assertGreaterEqual(len(clusters), 2)
        for fc in clusters:
            self.assertEqual(len({m >= 100 for m in fc.members}), 1)
            self.assertEqual(fc.id, min(fc.members))

    def test_extent_cap_splits_wide_groups(self):
        config = get_config(cluster_extent_factor=0.05)
        wide = [frontier(i, [i * 0.6, 0.0, 0.0], [0.0, 0.0, 1.0]) for i in range(12)]
        clusters = cluster_frontiers(wide, config=config, sensor_range=10.0)
        for fc in clusters:
            centers = np.array([[m * 0.6, 0.0, 0.0] for m in fc.members])
            extent = np.linalg.norm(centers - centers.mean(axis=0), axis=1).max()
            self.assertTrue(len(fc) == 1 or extent <= 0.5 + 1e-9)

    def test_same_input_same_clusters(self):
        first = [fc.members for fc in cluster_frontiers(self.frontiers, seed=3)]
        second = [fc.members for fc in cluster_frontiers(list(reversed(self.frontiers)), seed=3)]
        self.assertEqual(first, second)

    def test_single_and_empty_inputs(self):
        self.assertEqual(cluster_frontiers([]), [])
        clusters = cluster_frontiers(self.frontiers[:1])
        self.assertEqual([fc.members for fc in clusters], [(0,)])


class ViewpointTests(SimpleTestCase):

    def setUp(self):
        self.fc = FrontierCluster.from_frontiers([
            frontier(4, [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
            frontier(9, [0.2, 0.0, 0.0], [0.0, 0.0, 1.0]),
        ])
        self.config = get_config(r_opt_factor=0.5)

    def test_candidate_grid_size(self):
        candidates = viewpoint_candidates(np.zeros(3), np.array([0.0, 0.0, 1.0]), 2.0)
        self.assertEqual(len(candidates), 5 * (1 + 8 + 8))

    def test_best_candidate_sits_on_the_normal_at_r_opt(self):
        vp = gen_viewpoint(self.fc, all_free, self.config, sensor_range=4.0)
        self.assertEqual(vp.fc_id, 4)
        np.testing.assert_allclose(vp.position, [0.1, 0.0, 2.0], atol=1e-6)

    def test_occupied_candidates_are_skipped(self):
        def not_on_axis(points):
            return np.linalg.norm(points[:, :2] - [0.1, 0.0], axis=1) > 1e-6

        vp = gen_viewpoint(self.fc, not_on_axis, self.config, sensor_range=4.0)
        self.assertGreater(np.linalg.norm(vp.position[:2] - [0.1, 0.0]), 0.1)

    def test_no_free_candidate_gives_none(self):
        self.assertIsNone(gen_viewpoint(self.fc, none_free, self.config, sensor_range=4.0))

    def test_zero_normal_gives_none(self):
        fc = FrontierCluster(id=1, members=(1,), center=np.zeros(3), normal=np.zeros(3))
        self.assertIsNone(gen_viewpoint(fc, all_free, self.config))


class SuperViewpointTests(SimpleTestCase):

    def test_nearby_viewpoints_merge(self):
        vps = [Viewpoint(5, np.array([0.0, 0.0, 0.0])), Viewpoint(2, np.array([0.5, 0.0, 0.0])),
               Viewpoint(7, np.array([10.0, 0.0, 0.0]))]
        svps = gen_super_viewpoints(vps, svp_radius=1.0)
        self.assertEqual([svp.key for svp in svps], [(2, 5), (7,)])
        np.testing.assert_allclose(svps[0].position, [0.25, 0.0, 0.0])
        np.testing.assert_allclose(svps[0].target, svps[0].position)

    def test_members_stay_within_twice_the_radius(self):
        vps = [Viewpoint(i, np.array([0.9 * i, 0.0, 0.0])) for i in range(6)]
        for svp in gen_super_viewpoints(vps, svp_radius=1.0):
            positions = [vp.position for vp in svp.viewpoints]
            for a in positions:
                for b in positions:
                    self.assertLessEqual(np.linalg.norm(a - b), 2.0 + 1e-9)

    def test_target_falls_back_to_nearest_member(self):
        vps = [Viewpoint(1, np.array([0.0, 0.0, 0.0])), Viewpoint(3, np.array([1.0, 0.0, 0.0]))]

        def centroid_blocked(points):
            return np.abs(points[:, 0] - 0.5) > 1e-9

        svps = gen_super_viewpoints(vps, svp_radius=1.0, is_free=centroid_blocked)
        self.assertEqual(len(svps), 1)
        np.testing.assert_allclose(svps[0].target, [0.0, 0.0, 0.0])


class SfiCodecTests(SimpleTestCase):

    def setUp(self):
        cluster = ClusterRecord(members=(3, 7), center=np.array([1.0, 2.0, 3.0]),
                                normal=np.array([0.0, 0.0, 1.0]), viewpoint=np.array([1.0, 2.0, 5.0]))
        orphan = ClusterRecord(members=(11,), center=np.array([4.0, 4.0, 1.0]), normal=np.array([1.0, 0.0, 0.0]))
        self.svps = [SuperViewpointRecord(position=np.array([1.0, 2.0, 5.0]), clusters=(cluster,))]
        self.orphans = [orphan]

    def test_decode_restores_records(self):
        buffer = encode_sfi(self.svps, self.orphans)
        svps, orphans, offset = decode_sfi(buffer)
        self.assertEqual(offset, len(buffer))
        self.assertEqual(svps[0].clusters[0].members, (3, 7))
        np.testing.assert_allclose(svps[0].clusters[0].viewpoint, [1.0, 2.0, 5.0])
        self.assertIsNone(orphans[0].viewpoint)
        self.assertEqual(orphans[0].members, (11,))

    def test_truncated_stream_raises(self):
        buffer = encode_sfi(self.svps, self.orphans)
        for cut in (3, len(buffer) - 4):
            with self.assertRaises(CodecError):
                decode_sfi(buffer[:cut])

    def test_empty_index_is_just_the_header(self):
        buffer = encode_sfi([], [])
        self.assertEqual(len(buffer), 8)
        self.assertEqual(decode_sfi(buffer), ([], [], 8))
