"""
Protocol Trace - `t,event,payload` rows for post-hoc liveness auditing
"""

import csv

MEET = 'MEET'
MERGE = 'MERGE'
MISSION = 'MISSION'
KEEP = 'KEEP'
RELEASE = 'RELEASE'
COMPLETE = 'COMPLETE'
HALT = 'HALT'


class ProtocolTrace:
    header = ['t', 'event', 'payload']

    def __init__(self):
        self.rows = []

    def log(self, t, event, payload=''):
        self.rows.append((float(t), event, str(payload)))

    def events(self, kind):
        return [row for row in self.rows if row[1] == kind]

    def __len__(self):
        return len(self.rows)

    def write_csv(self, path):
        with open(path, 'w', newline='') as handle:
            writer = csv.writer(handle)
            writer.writerow(self.header)
            for t, event, payload in self.rows:
                writer.writerow([f'{t:.3f}', event, payload])
