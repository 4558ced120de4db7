"""
Plan Trace - one `t,robot,source,svps,travel,budget` row per adopted plan
"""

import csv

CENTRAL = 'central'
LOCAL = 'local'
DIRECT = 'direct'


class PlanTrace:
    header = ['t', 'robot', 'source', 'svps', 'travel', 'budget']

    def __init__(self):
        self.rows = []

    def log(self, t, robot_id, source, svp_keys, travel, budget):
        keys = ' '.join('/'.join(str(m) for m in key) for key in svp_keys)
        self.rows.append((float(t), int(robot_id), source, keys, float(travel), float(budget)))

    def for_robot(self, robot_id):
        return [row for row in self.rows if row[1] == robot_id]

    def __len__(self):
        return len(self.rows)

    def write_csv(self, path):
        with open(path, 'w', newline='') as handle:
            writer = csv.writer(handle)
            writer.writerow(self.header)
            for t, robot_id, source, keys, travel, budget in self.rows:
                writer.writerow([f'{t:.3f}', robot_id, source, keys, f'{travel:.3f}', f'{budget:.3f}'])
