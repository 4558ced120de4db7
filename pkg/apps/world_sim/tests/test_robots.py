import numpy as np
from django.test import SimpleTestCase

from apps.core.exceptions import ScenarioError, SimulationFault
from apps.world_sim.clock import SimClock
from apps.world_sim.comm import comm_graph, meeting_pairs
from apps.world_sim.events import ARRIVED, EXPIRED, FRAME, MEET
from apps.world_sim.robots import RobotState, step
from apps.world_sim.world import VoxelWorld


def make_robot(robot_id, position, **kwargs):
    return RobotState(id=robot_id, position=np.asarray(position, dtype=float), **kwargs)


class StepTests(SimpleTestCase):

    def setUp(self):
        self.world = VoxelWorld.empty((10.0, 10.0, 2.0), 0.5, origin=(-1.0, -1.0, -1.0))

    def test_unit_speed_unit_time(self):
        robot = make_robot(0, [0, 0, 0], v_max=1.0).with_path([[5.0, 0.0, 0.0]])
        moved, events, travelled = step(self.world, [robot], 1.0)
        np.testing.assert_allclose(moved[0].position, [1.0, 0.0, 0.0])
        self.assertAlmostEqual(travelled[0], 1.0)
        self.assertEqual(events, [])

    def test_zero_dt_keeps_state_and_emits_nothing(self):
        robot = make_robot(0, [0, 0, 0]).with_path([[5.0, 0.0, 0.0]])
        moved, events, _ = step(self.world, [robot], 0.0)
        np.testing.assert_array_equal(moved[0].position, robot.position)
        self.assertEqual(events, [])

    def test_arrival_event_when_path_ends(self):
        robot = make_robot(0, [0, 0, 0], v_max=2.0).with_path([[0.5, 0.0, 0.0], [1.0, 0.0, 0.0]])
        moved, events, travelled = step(self.world, [robot], 1.0)
        self.assertFalse(moved[0].is_moving)
        self.assertAlmostEqual(travelled[0], 1.0)
        self.assertEqual([e.event for e in events], [ARRIVED])

    def test_path_through_wall_faults_with_robot_and_cell(self):
        self.world.fill_box([2.0, -1.0, -1.0], [2.5, 9.0, 1.0])
        robot = make_robot(7, [0, 0, 0], v_max=5.0).with_path([[4.0, 0.0, 0.0]])
        with self.assertRaises(SimulationFault) as caught:
            step(self.world, [robot], 1.0)
        self.assertEqual(caught.exception.context['robot_id'], 7)

    def test_meeting_events_are_symmetric(self):
        robots = [make_robot(0, [0, 0, 0]), make_robot(1, [2.9, 0, 0])]
        _, events, _ = step(self.world, robots, 0.5)
        meets = {(e.robot, e.payload) for e in events if e.event == MEET}
        self.assertEqual(meets, {(0, '1'), (1, '0')})

    def test_frame_and_expiry_events(self):
        robots = [make_robot(0, [0, 0, 0])]
        _, events, _ = step(self.world, robots, 0.5, t=1.0, frame_due=lambda r: True, deadlines={0: 1.2})
        self.assertEqual(sorted(e.event for e in events), [EXPIRED, FRAME])

    def test_invalid_robot_parameters(self):
        with self.assertRaises(ScenarioError):
            make_robot(0, [0, 0, 0], v_max=0.0)
        with self.assertRaises(ScenarioError):
            make_robot(0, [0, 0, 0], comm_range=-1.0)


class CommGraphTests(SimpleTestCase):

    def test_mutual_range_gives_one_component(self):
        robots = [make_robot(i, [i, 0, 0]) for i in range(3)]
        self.assertEqual(comm_graph(robots), [frozenset({0, 1, 2})])

    def test_closed_threshold(self):
        robots = [make_robot(0, [0, 0, 0]), make_robot(1, [3.0, 0, 0])]
        self.assertEqual(meeting_pairs(robots), [(0, 1)])

    def test_chain_is_relayed(self):
        robots = [make_robot(0, [0, 0, 0]), make_robot(1, [2.5, 0, 0]), make_robot(2, [5.0, 0, 0])]
        self.assertNotIn((0, 2), meeting_pairs(robots))
        self.assertEqual(comm_graph(robots), [frozenset({0, 1, 2})])

    def test_link_uses_the_smaller_range(self):
        robots = [make_robot(0, [0, 0, 0], comm_range=10.0), make_robot(1, [4.0, 0, 0], comm_range=3.0)]
        self.assertEqual(comm_graph(robots), [frozenset({0}), frozenset({1})])

    def test_components_match_union_find_recount(self):
        rng = np.random.default_rng(11)
        robots = [make_robot(i, rng.uniform(0, 12, size=3) * [1, 1, 0]) for i in range(8)]
        components = comm_graph(robots)
        label = {}
        for index, component in enumerate(components):
            for robot_id in component:
                label[robot_id] = index
        for a in robots:
            for b in robots:
                if np.linalg.norm(a.position - b.position) <= 3.0:
                    self.assertEqual(label[a.id], label[b.id])


class SimClockTests(SimpleTestCase):

    def test_time_is_derived_from_ticks(self):
        clock = SimClock(0.1)
        for _ in range(10):
            clock.advance()
        self.assertAlmostEqual(clock.t_cur, 1.0, places=12)

    def test_dt_must_be_positive(self):
        with self.assertRaises(ScenarioError):
            SimClock(0.0)
