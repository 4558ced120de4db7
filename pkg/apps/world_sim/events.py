"""
Simulation Events - line-oriented `t,robot,event,payload` records
"""

import csv
from dataclasses import dataclass

FRAME = 'FRAME'
MEET = 'MEET'
ARRIVED = 'ARRIVED'
EXPIRED = 'EXPIRED'
COMPLETE = 'COMPLETE'
HALT = 'HALT'


@dataclass(frozen=True, order=True)
class SimEvent:
    t: float
    robot: int
    event: str
    payload: str = ''

    def as_row(self):
        return [f'{self.t:.3f}', self.robot, self.event, self.payload]


class EventLog:
    """Append-only event sink, flushed as CSV by the harness."""

    header = ['t', 'robot', 'event', 'payload']

    def __init__(self):
        self.rows = []

    def extend(self, events):
        self.rows.extend(events)

    def append(self, event):
        self.rows.append(event)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def write_csv(self, path):
        with open(path, 'w', newline='') as handle:
            writer = csv.writer(handle)
            writer.writerow(self.header)
            for event in self.rows:
                writer.writerow(event.as_row())
