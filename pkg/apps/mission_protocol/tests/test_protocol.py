import os
import tempfile

import numpy as np
from django.test import SimpleTestCase

from apps.core.exceptions import DeadlineFault, ProtocolFault
from apps.mission_protocol.missions import (
    DECIDING, DISPERSING, MERGING, CentralOutcome, MeetingSession, Mission,
)
from apps.mission_protocol.protocol import MissionProtocol, select_host
from apps.mission_protocol.trace import COMPLETE, HALT, KEEP, MEET, MERGE, MISSION, RELEASE, ProtocolTrace

DT = 0.5
RENDEZVOUS = np.array([20.0, 0.0, 0.0])


class FakeTeam:
    """Straight-line team with scripted planning results."""

    def __init__(self, positions, horizon=50.0):
        self.positions = {r: np.asarray(p, dtype=float) for r, p in positions.items()}
        self.horizon = horizon
        self.exhausted = False
        self.busy = set()
        self.exchanges = []
        self.plans = []
        self.seals = []
        self.leftover = 4

    def exchange(self, host, members, t):
        self.exchanges.append((host, frozenset(members), t))

    def seal(self, host, members, t):
        self.seals.append((host, frozenset(members), t))
        return self.leftover

    def plan(self, robot_ids, t, last_missions):
        self.plans.append((tuple(robot_ids), t, tuple(last_missions)))
        if self.exhausted:
            return None
        return CentralOutcome(
            position=RENDEZVOUS + [len(self.plans), 0.0, 0.0],
            deadline=t + self.horizon,
            rendezvous_key=(len(self.plans),),
            routes={r: ((r, 100),) for r in robot_ids},
            costs={r: 10.0 for r in robot_ids},
        )

    def motion_cost(self, robot_id, position):
        return float(np.linalg.norm(self.positions[robot_id] - position))

    def position(self, robot_id):
        return self.positions[robot_id]

    def comm_range(self, robot_id):
        return 3.0

    def ready(self, robot_id):
        return robot_id not in self.busy


def mission(mission_id=1, participants=(0, 1), deadline=30.0, version=0):
    return Mission(id=mission_id, position=RENDEZVOUS, deadline=deadline,
                   participants=frozenset(participants), assigned_at=0.0, version=version)


class MissionTests(SimpleTestCase):

    def test_deadline_must_follow_assignment(self):
        with self.assertRaises(ProtocolFault):
            Mission(id=1, position=RENDEZVOUS, deadline=5.0, participants=frozenset({0}), assigned_at=5.0)

    def test_release_bumps_the_version(self):
        kept = mission(participants=(0, 1, 2)).without([1, 2])
        self.assertEqual(kept.participants, frozenset({0}))
        self.assertEqual(kept.version, 1)

    def test_fulfilled_by_and_payload(self):
        m = mission()
        self.assertTrue(m.fulfilled_by({0, 1, 5}))
        self.assertFalse(m.fulfilled_by({0}))
        self.assertEqual(m.as_payload(), '1;20.00 0.00 0.00;30.000;0 1')

    def test_host_is_the_minimum_id(self):
        self.assertEqual(select_host({4, 2, 7}), 2)

    def test_session_phases(self):
        session = MeetingSession({1, 2}, 1)
        self.assertEqual(session.phase, MERGING)
        self.assertEqual(session.advance(), DECIDING)
        self.assertEqual(session.advance(), DISPERSING)
        with self.assertRaises(ProtocolFault):
            session.advance()
        with self.assertRaises(ProtocolFault):
            MeetingSession({1, 2}, 3)


class MeetingTests(SimpleTestCase):

    def setUp(self):
        self.team = FakeTeam({0: [0, 0, 0], 1: [1, 0, 0], 2: [2, 0, 0]})
        self.protocol = MissionProtocol([0, 1, 2], DT)

    def test_first_meeting_merges_through_the_host_and_assigns_one_mission(self):
        outcome = self.protocol.on_meeting({1, 2}, 0.0, self.team)
        self.assertEqual(outcome.host, 1)
        self.assertEqual(self.team.exchanges, [(1, frozenset({1, 2}), 0.0)])
        m1, m2 = self.protocol.mission_of(1), self.protocol.mission_of(2)
        self.assertIs(m1, m2)
        self.assertEqual(m1.participants, frozenset({1, 2}))
        self.assertEqual(outcome.routes[2], ((2, 100),))
        self.assertEqual([row[1] for row in self.protocol.trace.rows], [MEET, MERGE, MISSION])

    def test_lone_robot_plans_without_exchange(self):
        self.protocol.on_meeting({0}, 0.0, self.team)
        self.assertEqual(self.team.exchanges, [])
        self.assertEqual(self.protocol.mission_of(0).participants, frozenset({0}))

    def test_deadline_meeting_is_scheduled_and_replanned(self):
        first = self.protocol.on_meeting({0, 1}, 0.0, self.team).missions[0]
        outcome = self.protocol.on_meeting({0, 1}, first.deadline - DT, self.team)
        self.assertEqual(outcome.scheduled, [first.id])
        self.assertNotEqual(self.protocol.mission_of(0).id, first.id)
        self.assertEqual(self.team.plans[-1][2], ((first.position, first.deadline),) * 2)

    def test_early_meeting_is_scheduled_once_routes_are_done_near_the_rendezvous(self):
        first = self.protocol.on_meeting({0, 1}, 0.0, self.team).missions[0]
        self.team.positions[0] = first.position + [1.0, 0.0, 0.0]
        self.team.positions[1] = first.position + [2.0, 0.0, 0.0]
        outcome = self.protocol.on_meeting({0, 1}, 10.0, self.team)
        self.assertEqual(outcome.scheduled, [first.id])

    def test_unready_participant_turns_an_early_meeting_into_a_release(self):
        first = self.protocol.on_meeting({0, 1}, 0.0, self.team).missions[0]
        self.team.positions[0] = first.position + [1.0, 0.0, 0.0]
        self.team.positions[1] = first.position + [2.0, 0.0, 0.0]
        self.team.busy.add(1)
        outcome = self.protocol.on_meeting({0, 1}, 10.0, self.team)
        self.assertEqual(outcome.scheduled, [])
        self.assertEqual(outcome.released, {1})
        self.assertEqual(self.protocol.mission_of(0).participants, frozenset({0}))

    def test_deadline_is_clamped_to_the_next_tick(self):
        self.team.horizon = 0.0
        outcome = self.protocol.on_meeting({0}, 4.0, self.team)
        self.assertEqual(outcome.missions[0].deadline, 4.0 + DT)

    def test_three_robots_at_a_scheduled_meeting_share_one_new_mission(self):
        first = self.protocol.on_meeting({0, 1, 2}, 0.0, self.team).missions[0]
        outcome = self.protocol.on_meeting({0, 1, 2}, first.deadline - DT, self.team)
        self.assertEqual(outcome.scheduled, [first.id])
        renewed = self.protocol.mission_of(0)
        self.assertNotEqual(renewed.id, first.id)
        self.assertIs(self.protocol.mission_of(1), renewed)
        self.assertIs(self.protocol.mission_of(2), renewed)
        self.assertEqual(renewed.participants, frozenset({0, 1, 2}))
        self.assertEqual(len(self.protocol.trace.events(MISSION)), 2)

    def test_no_svp_left_completes_the_robots(self):
        self.team.exhausted = True
        outcome = self.protocol.on_meeting({0, 1, 2}, 3.0, self.team)
        self.assertEqual(outcome.complete, {0, 1, 2})
        self.assertTrue(self.protocol.finished)
        self.assertEqual(self.protocol.trace.events(COMPLETE)[0][2], '0 1 2')
        self.assertEqual(self.protocol.deadlines(), {})


class AccidentalMeetingTests(SimpleTestCase):

    def setUp(self):
        self.team = FakeTeam({0: [0, 0, 0], 1: [1, 0, 0], 2: [2, 0, 0]})
        self.protocol = MissionProtocol([0, 1, 2], DT)
        self.shared = self.protocol.on_meeting({0, 1, 2}, 0.0, self.team).missions[0]

    def test_closest_holder_keeps_the_mission(self):
        self.team.positions[1] = self.shared.position - [0.5, 0.0, 0.0]
        outcome = self.protocol.on_meeting({0, 1}, 5.0, self.team)
        self.assertEqual(list(outcome.kept), [1])
        self.assertEqual(outcome.released, {0})
        kept = self.protocol.mission_of(1)
        self.assertEqual(kept.participants, frozenset({1, 2}))
        self.assertEqual(kept.version, 1)
        self.assertNotEqual(self.protocol.mission_of(0).id, self.shared.id)
        self.assertEqual(len(self.protocol.trace.events(KEEP)), 1)
        self.assertEqual(self.protocol.trace.events(RELEASE)[0][2], f'0;{self.shared.id}')

    def test_newest_copy_wins_at_the_next_meeting(self):
        self.team.positions[1] = self.shared.position - [0.5, 0.0, 0.0]
        self.protocol.on_meeting({0, 1}, 5.0, self.team)
        self.assertEqual(self.protocol.mission_of(2).version, 0)
        self.protocol.reconcile({1, 2})
        self.assertEqual(self.protocol.mission_of(2).participants, frozenset({1, 2}))

    def test_nothing_left_to_explore_keeps_everyone_on_the_mission(self):
        self.team.exhausted = True
        outcome = self.protocol.on_meeting({0, 1}, 5.0, self.team)
        self.assertEqual(outcome.released, set())
        self.assertIs(self.protocol.mission_of(0), self.shared)

    def test_missed_deadline_is_a_fault(self):
        self.protocol.check_deadlines(self.shared.deadline + DT)
        with self.assertRaises(DeadlineFault) as caught:
            self.protocol.check_deadlines(self.shared.deadline + 2 * DT)
        self.assertEqual(caught.exception.mission_id, self.shared.id)


class FinalMeetingTests(SimpleTestCase):

    def setUp(self):
        self.team = FakeTeam({0: [0, 0, 0], 1: [1, 0, 0], 2: [2, 0, 0]})
        self.protocol = MissionProtocol([0, 1, 2], DT)
        self.team.exhausted = True
        self.protocol.on_meeting({0, 1}, 0.0, self.team)
        self.protocol.on_meeting({2}, 0.0, self.team)

    def test_exhausted_team_seals_and_halts(self):
        outcome = self.protocol.on_final_meeting({0, 1, 2}, 12.0, self.team)
        self.assertTrue(outcome.halted)
        self.assertTrue(self.protocol.halted)
        self.assertEqual(self.team.exchanges[-1], (0, frozenset({0, 1, 2}), 12.0))
        self.assertEqual(self.team.seals, [(0, frozenset({0, 1, 2}), 12.0)])
        self.assertEqual(self.protocol.trace.events(HALT), [(12.0, HALT, '0;4')])
        self.assertEqual([row[1] for row in self.protocol.trace.rows[-3:]], [MEET, MERGE, HALT])

    def test_merged_super_viewpoints_resume_exploration(self):
        self.team.exhausted = False
        outcome = self.protocol.on_final_meeting({0, 1, 2}, 12.0, self.team)
        self.assertFalse(outcome.halted)
        self.assertEqual(self.team.seals, [])
        self.assertEqual(self.protocol.complete, set())
        joint = self.protocol.mission_of(0)
        self.assertEqual(joint.participants, frozenset({0, 1, 2}))
        self.assertIs(self.protocol.mission_of(2), joint)

    def test_needs_the_whole_completed_team(self):
        with self.assertRaises(ProtocolFault):
            self.protocol.on_final_meeting({0, 1}, 12.0, self.team)
        protocol = MissionProtocol([0, 1], DT)
        with self.assertRaises(ProtocolFault):
            protocol.on_final_meeting({0, 1}, 0.0, self.team)


class ProtocolTraceTests(SimpleTestCase):

    def test_csv_rows(self):
        trace = ProtocolTrace()
        trace.log(1.0, MEET, '0;0 1')
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'protocol.csv')
            trace.write_csv(path)
            with open(path) as handle:
                self.assertEqual(handle.read().splitlines(), ['t,event,payload', '1.000,MEET,0;0 1'])
