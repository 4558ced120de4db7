"""
Byte Ledger - every stream sent between robots, exported as `t,from,to,bytes`
"""

import csv
from collections import defaultdict
from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class Transfer:
    t: float
    sender: int
    receiver: int
    nbytes: int

    def as_row(self):
        return [f'{self.t:.3f}', self.sender, self.receiver, self.nbytes]


class ByteLedger:
    """Append-only record of library streams; the only channel between robots."""

    header = ['t', 'from', 'to', 'bytes']

    def __init__(self):
        self.transfers = []

    def record(self, t, sender, receiver, nbytes):
        transfer = Transfer(float(t), int(sender), int(receiver), int(nbytes))
        self.transfers.append(transfer)
        return transfer

    def __len__(self):
        return len(self.transfers)

    @property
    def total(self):
        return sum(transfer.nbytes for transfer in self.transfers)

    def per_link(self):
        """Bytes per undirected link keyed 'a-b' with a < b."""
        totals = defaultdict(int)
        for transfer in self.transfers:
            a, b = sorted((transfer.sender, transfer.receiver))
            totals[f'{a}-{b}'] += transfer.nbytes
        return dict(sorted(totals.items()))

    def write_csv(self, path):
        with open(path, 'w', newline='') as handle:
            writer = csv.writer(handle)
            writer.writerow(self.header)
            for transfer in self.transfers:
                writer.writerow(transfer.as_row())
