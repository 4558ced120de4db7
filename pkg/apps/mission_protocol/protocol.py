"""
Mission Protocol
Meeting -> Merging -> Mission state machine. The protocol owns every robot's
mission copy and talks to the rest of the system through a `team` object:

    team.exchange(host, members, t)          merge libraries through the host
    team.plan(robot_ids, t, last_missions)   CentralOutcome, or None when no SVP is left
    team.motion_cost(robot_id, position)     seconds from the robot to a point
    team.position(robot_id)
    team.comm_range(robot_id)
    team.ready(robot_id)                     no SVP left on the robot's route
    team.seal(host, members, t)              retire every frontier left, push to the members
"""

import logging

import numpy as np

from apps.core.conf import get_config
from apps.core.exceptions import DeadlineFault, ProtocolFault
from .missions import MeetingOutcome, MeetingSession, Mission
from .trace import COMPLETE, HALT, KEEP, MEET, MERGE, MISSION, RELEASE, ProtocolTrace

logger = logging.getLogger(__name__)


def select_host(members):
    """Minimum robot id."""
    return min(members)


def _ids(robot_ids):
    return ' '.join(str(r) for r in sorted(robot_ids))


class MissionProtocol:

    def __init__(self, robot_ids, dt, config=None, trace=None):
        self.config = config or get_config()
        self.dt = dt
        self.missions = {robot_id: None for robot_id in sorted(robot_ids)}
        self.complete = set()
        self.trace = trace if trace is not None else ProtocolTrace()
        self.halted = False
        self._next_id = 0

    # State queries

    def mission_of(self, robot_id):
        return self.missions.get(robot_id)

    def active(self):
        return {r for r in self.missions if r not in self.complete}

    @property
    def finished(self):
        return self.complete == set(self.missions)

    def deadlines(self):
        return {r: m.deadline for r, m in self.missions.items() if m is not None}

    # Meetings

    def reconcile(self, members):
        """Members adopt the newest copy of every mission they hold."""
        newest = {}
        for robot_id in members:
            mission = self.missions.get(robot_id)
            if mission is not None:
                known = newest.get(mission.id)
                if known is None or mission.version > known.version:
                    newest[mission.id] = mission
        for robot_id in members:
            mission = self.missions.get(robot_id)
            if mission is not None:
                self.missions[robot_id] = newest[mission.id]

    def is_scheduled(self, mission, members, team, t):
        """
        Every participant is in the meeting, and either the deadline window is
        open or every participant has finished its route and the group is
        already within radio range of the rendezvous.
        """
        if not mission.fulfilled_by(members):
            return False
        if t >= mission.deadline - self.dt:
            return True
        if not all(team.ready(r) for r in mission.participants):
            return False
        return any(
            float(np.linalg.norm(team.position(r) - mission.position)) <= team.comm_range(r)
            for r in mission.participants
        )

    def _assign(self, robot_ids, outcome, t, result):
        self._next_id += 1
        deadline = max(outcome.deadline, t + self.dt)
        mission = Mission(
            id=self._next_id,
            position=np.asarray(outcome.position, dtype=float),
            deadline=deadline,
            participants=frozenset(robot_ids),
            assigned_at=t,
            rendezvous_key=tuple(outcome.rendezvous_key),
        )
        for robot_id in robot_ids:
            self.missions[robot_id] = mission
            result.missions[robot_id] = mission
            result.routes[robot_id] = tuple(outcome.routes.get(robot_id, ()))
        result.decisions.append(outcome)
        self.trace.log(t, MISSION, mission.as_payload())
        logger.info(f'Mission {mission.id} assigned to robots {sorted(robot_ids)}, rendezvous at t={deadline:.1f}')
        return mission

    def _last_missions(self, robot_ids):
        return [
            (self.missions[r].position, self.missions[r].deadline)
            for r in robot_ids if self.missions.get(r) is not None
        ]

    def on_meeting(self, members, t, team):
        """
        Merge through the host, then decide: fulfilled missions and mission-less
        members are planned jointly; members sharing an unfulfilled mission keep
        it for one robot and re-plan the rest. Other members only merge.
        """
        members = frozenset(members)
        session = MeetingSession(members, select_host(members))
        result = MeetingOutcome(host=session.host)
        self.trace.log(t, MEET, f'{session.host};{_ids(members)}')

        if len(members) > 1:
            team.exchange(session.host, members, t)
            self.trace.log(t, MERGE, f'{session.host};{_ids(members)}')
        session.advance()

        self.reconcile(members)
        active = members - self.complete
        planned = {r for r in active if self.missions[r] is None}
        holders = {}
        for robot_id in sorted(active):
            mission = self.missions[robot_id]
            if mission is not None:
                holders.setdefault(mission.id, []).append(robot_id)

        released_groups = []
        for mission_id in sorted(holders):
            mission = self.missions[holders[mission_id][0]]
            if self.is_scheduled(mission, members, team, t):
                planned |= mission.participants
                result.scheduled.append(mission.id)
            elif len(holders[mission_id]) > 1:
                released_groups.append((mission, holders[mission_id]))

        if planned:
            self._decide(sorted(planned), t, team, result)

        for mission, group in released_groups:
            self.on_accidental_meeting(mission, group, t, team, result)

        session.advance()
        return result

    def _decide(self, robot_ids, t, team, result):
        outcome = team.plan(robot_ids, t, self._last_missions(robot_ids))
        if outcome is None:
            for robot_id in robot_ids:
                self.missions[robot_id] = None
                self.complete.add(robot_id)
                result.complete.add(robot_id)
            self.trace.log(t, COMPLETE, _ids(robot_ids))
            logger.info(f'Robots {robot_ids} found no super viewpoint left; exploration complete for them')
            return None
        return self._assign(robot_ids, outcome, t, result)

    def on_accidental_meeting(self, mission, holders, t, team, result=None):
        """
        Among holders of an unfulfilled mission, the one with the smallest travel
        time to its rendezvous keeps it (ties: lowest id); the rest are released
        and planned together.
        """
        result = result if result is not None else MeetingOutcome(host=select_host(holders))
        keeper = min(holders, key=lambda r: (team.motion_cost(r, mission.position), r))
        released = sorted(r for r in holders if r != keeper)
        outcome = team.plan(released, t, self._last_missions(released))
        if outcome is None:
            # nothing to explore apart: everyone keeps the rendezvous
            return result
        kept = mission.without(released)
        self.missions[keeper] = kept
        result.kept[keeper] = kept
        self.trace.log(t, KEEP, f'{keeper};{kept.id}')
        for robot_id in released:
            self.trace.log(t, RELEASE, f'{robot_id};{mission.id}')
        result.released.update(released)
        self._assign(released, outcome, t, result)
        return result

    def on_final_meeting(self, members, t, team):
        """
        Every robot is complete and the whole team is in radio range: merge once more.
        Super viewpoints surfacing from the merge restart exploration with a joint
        mission. Otherwise the host seals the frontiers left and the run halts.
        """
        members = frozenset(members)
        if not self.finished or members != set(self.missions):
            raise ProtocolFault('The final meeting needs the whole team with exploration complete.',
                                members=sorted(members))
        host = select_host(members)
        result = MeetingOutcome(host=host)
        self.trace.log(t, MEET, f'{host};{_ids(members)}')
        if len(members) > 1:
            team.exchange(host, members, t)
            self.trace.log(t, MERGE, f'{host};{_ids(members)}')

        robot_ids = sorted(members)
        outcome = team.plan(robot_ids, t, [])
        if outcome is not None:
            self.complete.clear()
            logger.info(f'Final meeting at t={t:.1f} surfaced super viewpoints; exploration resumes')
            self._assign(robot_ids, outcome, t, result)
            return result

        sealed = team.seal(host, members, t)
        self.halted = result.halted = True
        self.trace.log(t, HALT, f'{host};{sealed}')
        logger.info(f'Final meeting at t={t:.1f}: host {host} sealed {sealed} frontiers, run halts')
        return result

    def check_deadlines(self, t):
        """A mission still held after T_c + dt was missed."""
        for robot_id, mission in sorted(self.missions.items()):
            if mission is not None and t > mission.deadline + self.dt + 1e-9:
                raise DeadlineFault(robot_id, mission.id, t)
