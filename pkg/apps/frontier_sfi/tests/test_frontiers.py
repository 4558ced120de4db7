import numpy as np
from django.test import SimpleTestCase

from apps.bench_harness.oracles import mesh_table_mismatches, scatter_points, random_polytopes
from apps.core.conf import get_config
from apps.frontier_sfi.frontiers import (
    MESH_ID_STRIDE, OriginIndex, delete_stale, extract_frontiers, frontier_parent, make_frontier_id,
)
from apps.frontier_sfi.mesh_table import MeshTable, mesh_in_polytope
from apps.star_convex.polytope import build_polytope, make_polytope_id
from apps.star_convex.sampling import sample_frame
from apps.world_sim.robots import RobotState
from apps.world_sim.world import VoxelWorld


def open_world():
    return VoxelWorld.empty((40.0, 40.0, 40.0), 0.5, origin=(-20.0, -20.0, -20.0))


def frame_polytope(position, seq=0, world=None, sensor_range=6.0):
    robot = RobotState(id=0, position=position, sensor_range=sensor_range)
    samples = sample_frame(world or open_world(), robot, get_config())
    return build_polytope(samples, robot.position, 2 * sensor_range, make_polytope_id(0, seq))


class MeshTableTests(SimpleTestCase):

    def test_agrees_with_all_tetrahedra_test(self):
        rng = np.random.default_rng(5)
        for polytope in random_polytopes(4, rng):
            points = scatter_points(polytope, rng, count=3000)
            self.assertEqual(mesh_table_mismatches(polytope, points), 0)

    def test_agrees_on_a_full_sphere_frame(self):
        rng = np.random.default_rng(6)
        polytope = frame_polytope([0.1, 0.2, 0.3])
        for cell_deg in (1.0, 2.0, 5.0):
            self.assertEqual(mesh_table_mismatches(polytope, scatter_points(polytope, rng, 3000), cell_deg), 0)

    def test_origin_is_contained(self):
        polytope = frame_polytope([0.1, 0.2, 0.3])
        table = MeshTable(polytope)
        self.assertTrue(mesh_in_polytope(polytope.origin, polytope, table))
        self.assertGreater(len(table.candidates(polytope.origin + [1.0, 0.0, 0.0])), 0)


class ExtractFrontiersTests(SimpleTestCase):

    def test_open_frame_meshes_are_all_frontiers_facing_the_robot(self):
        polytope = frame_polytope([0.1, 0.2, 0.3], seq=4)
        frontiers = extract_frontiers(polytope)
        self.assertEqual(len(frontiers), len(polytope.meshes))
        for frontier in frontiers:
            self.assertEqual(frontier_parent(frontier.id), polytope.id)
            self.assertGreater(float(np.dot(polytope.origin - frontier.center, frontier.normal)), 0.0)
            self.assertAlmostEqual(float(np.linalg.norm(frontier.normal)), 1.0)

    def test_obstacle_only_meshes_are_not_frontiers(self):
        world = open_world()
        world.fill_box([2.0, -20.0, -20.0], [2.5, 20.0, 20.0])
        polytope = frame_polytope([0.1, 0.2, 0.3], world=world)
        frontiers = extract_frontiers(polytope)
        self.assertLess(len(frontiers), len(polytope.meshes))
        for frontier in frontiers:
            self.assertIn(0, polytope.tags[polytope.meshes[frontier.id % MESH_ID_STRIDE]])

    def test_frontier_ids_are_unique_per_mesh(self):
        self.assertEqual(frontier_parent(make_frontier_id(123, 45)), 123)
        self.assertNotEqual(make_frontier_id(1, 0), make_frontier_id(0, 1))


class DeleteStaleTests(SimpleTestCase):

    def setUp(self):
        self.first = frame_polytope([0.1, 0.2, 0.3], seq=0)
        self.second = frame_polytope([3.1, 0.2, 0.3], seq=1)
        self.frontiers = extract_frontiers(self.first) + extract_frontiers(self.second)

    def test_matches_brute_force_deletion(self):
        polytopes = [self.first, self.second]
        survivors = delete_stale(self.frontiers, polytopes)
        expected = []
        for frontier in self.frontiers:
            others = [p for p in polytopes if p.id != frontier.polytope_id]
            if not any(p.contains(frontier.center[None, :])[0] for p in others):
                expected.append(frontier.id)
        self.assertEqual([f.id for f in survivors], expected)
        self.assertLess(len(survivors), len(self.frontiers))

    def test_single_polytope_keeps_its_frontiers(self):
        frontiers = extract_frontiers(self.first)
        self.assertEqual(len(delete_stale(frontiers, [self.first])), len(frontiers))

    def test_empty_input(self):
        self.assertEqual(delete_stale([], [self.first]), [])

    def test_origin_index_respects_each_radius(self):
        index = OriginIndex([self.first, self.second])
        near = index.near([[0.1, 0.2, 0.3], [50.0, 0.0, 0.0]])
        self.assertEqual(near[0], [0, 1])
        self.assertEqual(near[1], [])
        self.assertEqual(OriginIndex([]).near([[0.0, 0.0, 0.0]]), [[]])
