import math

import numpy as np
from django.test import SimpleTestCase

from apps.bench_harness.oracles import flip_violations, random_polytopes, star_violations
from apps.core.conf import get_config
from apps.core.exceptions import CodecError, DegenerateHullError, EmptyFrameError, FlipDomainError
from apps.star_convex.codec import decode_polytope, encode_polytope, encoded_size
from apps.star_convex.polytope import build_polytope, flip, make_polytope_id, split_polytope_id
from apps.star_convex.sampling import (
    TAG_FREE, TAG_OBS, SamplePointSets, sample_frame, sample_offsets, should_generate,
)
from apps.world_sim.robots import RobotState
from apps.world_sim.world import VoxelWorld


def open_world():
    return VoxelWorld.empty((40.0, 40.0, 40.0), 0.5, origin=(-20.0, -20.0, -20.0))


class SamplingTests(SimpleTestCase):

    def setUp(self):
        self.config = get_config(sampler_azimuth_step_deg=5.0, sampler_height_rings=5)

    def test_full_fov_offsets_lie_on_the_sensor_sphere(self):
        robot = RobotState(id=0, position=[0, 0, 0], sensor_range=6.0)
        offsets = sample_offsets(robot, self.config)
        # three rings of 72 azimuths plus the two poles
        self.assertEqual(len(offsets), 72 * 3 + 2)
        np.testing.assert_allclose(np.linalg.norm(offsets, axis=1), 6.0)

    def test_restricted_horizontal_fov(self):
        robot = RobotState(id=0, position=[0, 0, 0], sensor_range=6.0,
                           fov_h=math.radians(90.0), fov_v=math.radians(40.0))
        offsets = sample_offsets(robot, self.config)
        self.assertEqual(len(offsets), 19 * 5)
        azimuths = np.arctan2(offsets[:, 1], offsets[:, 0])
        self.assertLessEqual(np.abs(azimuths).max(), math.radians(45.0) + 1e-9)

    def test_open_world_frame_is_all_free(self):
        robot = RobotState(id=0, position=[0.1, 0.1, 0.1], sensor_range=6.0)
        samples = sample_frame(open_world(), robot, self.config)
        self.assertEqual(len(samples.obs), 0)
        self.assertEqual(len(samples), 72 * 3 + 2)

    def test_obstacle_hits_are_tagged_and_within_range(self):
        world = open_world()
        world.fill_box([3.0, -20.0, -20.0], [3.5, 20.0, 20.0])
        robot = RobotState(id=0, position=[0.1, 0.1, 0.1], sensor_range=6.0)
        samples = sample_frame(world, robot, self.config)
        self.assertGreater(len(samples.obs), 0)
        distances = np.linalg.norm(samples.obs - robot.position, axis=1)
        self.assertLessEqual(distances.max(), 6.0 + 1e-9)
        self.assertEqual(int((samples.tags == TAG_OBS).sum()), len(samples.obs))

    def test_enclosed_robot_raises_empty_frame(self):
        occupancy = np.ones((5, 5, 5), dtype=bool)
        occupancy[2, 2, 2] = False
        world = VoxelWorld(occupancy, 0.5)
        robot = RobotState(id=3, position=[1.25, 1.25, 1.25], sensor_range=6.0)
        with self.assertRaises(EmptyFrameError):
            sample_frame(world, robot, self.config)

    def test_generation_trigger(self):
        robot = RobotState(id=0, position=[2.0, 0, 0], sensor_range=6.0)
        config = get_config(gen_spacing_factor=0.5)
        self.assertTrue(should_generate(robot, None, config))
        self.assertFalse(should_generate(robot, [0.0, 0.0, 0.0], config))
        self.assertTrue(should_generate(robot, [-1.0, 0.0, 0.0], config))


class FlipTests(SimpleTestCase):

    def test_flip_is_an_involution(self):
        self.assertEqual(flip_violations(np.random.default_rng(0), trials=500), 0)

    def test_flip_maps_distance(self):
        flipped = flip([[3.0, 0.0, 0.0]], [0.0, 0.0, 0.0], 5.0)
        np.testing.assert_allclose(flipped, [[7.0, 0.0, 0.0]])

    def test_flip_domain(self):
        with self.assertRaises(FlipDomainError):
            flip([[0.0, 0.0, 0.0]], [0.0, 0.0, 0.0], 5.0)
        with self.assertRaises(FlipDomainError):
            flip([[10.0, 0.0, 0.0]], [0.0, 0.0, 0.0], 5.0)


class StarPolytopeTests(SimpleTestCase):

    def setUp(self):
        self.config = get_config()
        robot = RobotState(id=2, position=[0.1, 0.1, 0.1], sensor_range=6.0)
        self.samples = sample_frame(open_world(), robot, self.config)
        self.polytope = build_polytope(self.samples, robot.position, 12.0, make_polytope_id(2, 5))

    def test_ids_encode_robot_and_sequence(self):
        self.assertEqual(self.polytope.robot_id, 2)
        self.assertEqual(self.polytope.seq, 5)
        self.assertEqual(split_polytope_id(make_polytope_id(7, 123)), (7, 123))

    def test_contains_origin_and_near_points(self):
        points = self.polytope.origin + np.array([[1.0, 0, 0], [0, -1.0, 0], [0, 0, 1.0]])
        self.assertTrue(self.polytope.contains(self.polytope.origin[None, :])[0])
        self.assertTrue(self.polytope.contains(points).all())

    def test_default_rings_enclose_the_inner_sensor_ball(self):
        rng = np.random.default_rng(4)
        directions = rng.normal(size=(2000, 3))
        directions /= np.linalg.norm(directions, axis=1)[:, None]
        points = self.polytope.origin + 0.95 * 6.0 * directions
        self.assertTrue(self.polytope.contains(points).all())

    def test_excludes_points_beyond_the_sensor_range(self):
        far = self.polytope.origin + np.array([[8.0, 0, 0], [0, 0, -8.0]])
        self.assertFalse(self.polytope.contains(far).any())

    def test_free_frame_keeps_free_tags(self):
        self.assertTrue(np.all(self.polytope.tags[self.polytope.tags != TAG_OBS] == TAG_FREE))
        self.assertGreater(int((self.polytope.tags == TAG_FREE).sum()), 0)

    def test_segments_to_origin_stay_inside(self):
        rng = np.random.default_rng(1)
        self.assertEqual(star_violations(self.polytope, rng, rays=300), 0)
        for polytope in random_polytopes(3, rng, self.config):
            self.assertEqual(star_violations(polytope, rng, rays=200), 0)

    def test_too_few_samples_is_degenerate(self):
        samples = SamplePointSets(
            origin=np.zeros(3),
            free=np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0]]),
            obs=np.zeros((0, 3)),
        )
        with self.assertRaises(DegenerateHullError) as caught:
            build_polytope(samples, np.zeros(3), 4.0, 9)
        self.assertEqual(caught.exception.frame_id, 9)

    def test_with_retired_merges_ids(self):
        updated = self.polytope.with_retired([5, 3]).with_retired([3, 8])
        self.assertEqual(updated.retired, (3, 5, 8))
        self.assertEqual(self.polytope.retired, ())


class PolytopeCodecTests(SimpleTestCase):

    def setUp(self):
        robot = RobotState(id=1, position=[0.3, -0.2, 0.1], sensor_range=5.0)
        samples = sample_frame(open_world(), robot, get_config())
        self.polytope = build_polytope(samples, robot.position, 10.0, make_polytope_id(1, 0)).with_retired([42])

    def test_decoded_polytope_has_same_content(self):
        buffer = encode_polytope(self.polytope)
        self.assertEqual(len(buffer), encoded_size(self.polytope))
        decoded, offset = decode_polytope(buffer)
        self.assertEqual(offset, len(buffer))
        self.assertTrue(decoded.same_content(self.polytope))

    def test_large_robot_ids_survive_the_wire(self):
        polytope_id = make_polytope_id(5000, 7)
        self.assertGreater(polytope_id, 2 ** 32)
        samples = sample_frame(open_world(), RobotState(id=5000, position=[0.3, -0.2, 0.1], sensor_range=5.0))
        polytope = build_polytope(samples, samples.origin, 10.0, polytope_id)
        decoded, _ = decode_polytope(encode_polytope(polytope))
        self.assertEqual(decoded.id, polytope_id)
        self.assertEqual((decoded.robot_id, decoded.seq), (5000, 7))

    def test_truncated_stream_raises(self):
        buffer = encode_polytope(self.polytope)
        with self.assertRaises(CodecError):
            decode_polytope(buffer[:-5])
