"""
Missions and Meeting Sessions
"""

from dataclasses import dataclass, field, replace

import numpy as np

from apps.core.exceptions import ProtocolFault

MERGING = 'merging'
DECIDING = 'deciding'
DISPERSING = 'dispersing'
PHASES = (MERGING, DECIDING, DISPERSING)


@dataclass(frozen=True, eq=False)
class Mission:
    """
    An appointed rendezvous. Each holder keeps its own copy; `version` grows when
    participants are released so that copies can be reconciled at the next meeting.
    """

    id: int
    position: np.ndarray
    deadline: float
    participants: frozenset
    assigned_at: float
    rendezvous_key: tuple = ()
    version: int = 0

    def __post_init__(self):
        if self.deadline <= self.assigned_at:
            raise ProtocolFault(f'Mission {self.id} deadline {self.deadline} is not after {self.assigned_at}.',
                                mission_id=self.id)

    def without(self, robot_ids):
        return replace(self, participants=self.participants - frozenset(robot_ids), version=self.version + 1)

    def fulfilled_by(self, members):
        return self.participants <= frozenset(members)

    def as_payload(self):
        x, y, z = (float(v) for v in self.position)
        members = ' '.join(str(r) for r in sorted(self.participants))
        return f'{self.id};{x:.2f} {y:.2f} {z:.2f};{self.deadline:.3f};{members}'

    def __repr__(self):
        return f'Mission(id={self.id}, deadline={self.deadline:.1f}, participants={sorted(self.participants)})'


@dataclass
class MeetingSession:
    members: frozenset
    host: int
    phase: str = MERGING

    def __post_init__(self):
        self.members = frozenset(self.members)
        if self.host not in self.members:
            raise ProtocolFault(f'Host {self.host} is not a meeting member.')

    def advance(self):
        index = PHASES.index(self.phase)
        if index + 1 >= len(PHASES):
            raise ProtocolFault('Meeting session is already dispersing.')
        self.phase = PHASES[index + 1]
        return self.phase


@dataclass
class CentralOutcome:
    """Result of one central decision, in robot-id and SVP-key terms."""

    position: np.ndarray
    deadline: float
    rendezvous_key: tuple
    routes: dict = field(default_factory=dict)
    costs: dict = field(default_factory=dict)
    strategy: str = ''
    elapsed_s: float = 0.0
    fallback: bool = False


@dataclass
class MeetingOutcome:
    host: int
    missions: dict = field(default_factory=dict)
    routes: dict = field(default_factory=dict)
    complete: set = field(default_factory=set)
    kept: dict = field(default_factory=dict)
    released: set = field(default_factory=set)
    scheduled: list = field(default_factory=list)
    decisions: list = field(default_factory=list)
    halted: bool = False
