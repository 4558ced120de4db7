"""
Exact Joint Solver
Enumerates the rendezvous node, then solves the routing exactly: Held-Karp per
robot over SVP subsets, and a subset-partition DP over robots. Also builds the
binary decision variables of a plan and checks every joint constraint on them.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from apps.core.conf import get_config
from apps.core.exceptions import NoRendezvousError, SolverLimitExceeded
from .routing import RoutePlan

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class Decision:
    """x[k, i, j] arc use, y[k, i] node visit, t[i] rendezvous flag; J in seconds."""

    x: np.ndarray
    y: np.ndarray
    t: np.ndarray
    objective: float

    @classmethod
    def from_plan(cls, cost, plan):
        n, size = cost.n_robots, cost.size
        x = np.zeros((n, size, size), dtype=np.int8)
        y = np.zeros((n, size), dtype=np.int8)
        t = np.zeros(size, dtype=np.int8)
        t[plan.rendezvous] = 1
        for k, route in enumerate(plan.routes):
            for node in route:
                y[k, node] = 1
            for a, b in zip(route, route[1:]):
                x[k, a, b] = 1
        objective = float(sum(cost.d[i, j] for k in range(n) for i, j in zip(*np.nonzero(x[k]))))
        return cls(x=x, y=y, t=t, objective=objective)


def check_decision(cost, decision):
    """Returns the list of violated joint constraints (empty when feasible)."""
    x, y, t = decision.x, decision.y, decision.t
    n, size = cost.n_robots, cost.size
    svps = list(cost.svp_nodes)
    violations = []

    if int(t.sum()) != 1 or int(t[:n].sum()) != 0:
        violations.append('rendezvous must be exactly one SVP node')
    rendezvous = int(np.argmax(t))
    for k in range(n):
        if int(x[k, k, :].sum()) != 1:
            violations.append(f'robot {k} must leave its start exactly once')
        if int(x[k, :, k].sum()) != 0:
            violations.append(f'robot {k} must not re-enter its start')
        for other in range(n):
            if other != k and y[k, other]:
                violations.append(f'robot {k} visits the start of robot {other}')
        if int(x[k, rendezvous, :].sum()) != 0:
            violations.append(f'robot {k} departs the rendezvous')
        for i in svps:
            inflow, outflow = int(x[k, :, i].sum()), int(x[k, i, :].sum())
            if inflow != y[k, i]:
                violations.append(f'robot {k}: inflow of node {i} does not match its visit flag')
            if i != rendezvous and outflow != y[k, i]:
                violations.append(f'robot {k}: flow through node {i} is not conserved')
        if np.any(np.diag(x[k])):
            violations.append(f'robot {k} uses a self loop')
    for i in svps:
        visits = int(y[:, i].sum())
        if i == rendezvous and visits != n:
            violations.append(f'rendezvous {i} reached by {visits} of {n} robots')
        if i != rendezvous and visits != 1:
            violations.append(f'SVP {i} visited {visits} times')
    if np.any(x.sum(axis=(1, 2)) != y.sum(axis=1) - 1):
        violations.append('arc count does not match a single path per robot')
    expected = float((x * cost.d[None, :, :]).sum())
    if not math.isclose(expected, decision.objective, rel_tol=1e-9, abs_tol=1e-9):
        violations.append('objective differs from the arc cost sum')
    return violations


def _held_karp(d, start, nodes, end):
    """
    best[mask] = cheapest open path start -> all nodes in mask (any order) -> end,
    with the argmin order recoverable through `order(mask)`.
    """
    m = len(nodes)
    full = 1 << m
    inf = math.inf
    f = [[inf] * m for _ in range(full)]
    parent = [[-1] * m for _ in range(full)]
    for i in range(m):
        f[1 << i][i] = d[start, nodes[i]]
    for mask in range(1, full):
        row = f[mask]
        for last in range(m):
            value = row[last]
            if value == inf or not mask & (1 << last):
                continue
            for nxt in range(m):
                bit = 1 << nxt
                if mask & bit:
                    continue
                candidate = value + d[nodes[last], nodes[nxt]]
                if candidate < f[mask | bit][nxt]:
                    f[mask | bit][nxt] = candidate
                    parent[mask | bit][nxt] = last

    best = [inf] * full
    tail = [-1] * full
    best[0] = d[start, end]
    for mask in range(1, full):
        for last in range(m):
            if mask & (1 << last) and f[mask][last] < inf:
                candidate = f[mask][last] + d[nodes[last], end]
                if candidate < best[mask]:
                    best[mask], tail[mask] = candidate, last

    def order(mask):
        sequence = []
        last = tail[mask]
        while mask:
            sequence.append(nodes[last])
            previous = parent[mask][last]
            mask ^= 1 << last
            last = previous
        return sequence[::-1]

    return best, order


def _partition(per_robot, m):
    """min over assignments of disjoint masks (covering all) to robots; returns (cost, masks)."""
    full = (1 << m) - 1
    inf = math.inf
    layer = {mask: (per_robot[0][mask], (mask,)) for mask in range(full + 1)}
    for k in range(1, len(per_robot)):
        nxt = {}
        for mask in range(full + 1):
            best = (inf, ())
            sub = mask
            while True:
                prev = layer.get(mask ^ sub)
                if prev is not None and per_robot[k][sub] < inf:
                    candidate = prev[0] + per_robot[k][sub]
                    if candidate < best[0]:
                        best = (candidate, prev[1] + (sub,))
                if sub == 0:
                    break
                sub = (sub - 1) & mask
            nxt[mask] = best
        layer = nxt
    return layer[full]


def solve_given_rendezvous(cost, rendezvous):
    """Optimal routes for a fixed rendezvous node."""
    nodes = [node for node in cost.svp_nodes if node != rendezvous]
    m = len(nodes)
    tables = [_held_karp(cost.d, k, nodes, rendezvous) for k in range(cost.n_robots)]
    value, masks = _partition([table[0] for table in tables], m)
    routes = [[k] + tables[k][1](masks[k]) + [rendezvous] for k in range(cost.n_robots)]
    return value, RoutePlan.from_routes(cost, routes, rendezvous)


def solve_exact(cost, rendezvous=None, config=None):
    """
    Global minimiser of the summed travel cost over rendezvous choice, SVP
    assignment and visit order. Refuses instances above the exact cap.
    """
    config = config or get_config()
    if cost.n_svps == 0:
        raise NoRendezvousError('No reachable super viewpoint to meet at.')
    if cost.n_svps > config.exact_cap:
        raise SolverLimitExceeded(f'{cost.n_svps} SVPs exceed the exact cap of {config.exact_cap}.')
    candidates = [rendezvous] if rendezvous is not None else list(cost.svp_nodes)
    best = None
    for node in candidates:
        value, plan = solve_given_rendezvous(cost, node)
        if best is None or value < best[0] - 1e-12:
            best = (value, plan)
    plan = best[1]
    return Decision.from_plan(cost, plan), plan
