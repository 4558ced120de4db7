"""
Local Planner
Single-robot routing from the current position to the mission rendezvous under
a hard travel budget. SVPs are optional: each visited SVP earns a reward equal to
its penalty scale, and SVPs on another robot's assigned path are charged that
same amount, so they are only worth a zero-detour visit.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from apps.core.conf import get_config
from apps.core.exceptions import InfeasiblePlanError

logger = logging.getLogger(__name__)

START = 0
MEETING = 1
BUDGET_EPS = 1e-9


@dataclass(eq=False)
class LocalInstance:
    """
    Nodes: 0 = P_r, 1 = P_m, 2.. = known SVPs (keys in `svp_keys`).
    `foreign` holds the keys of SVPs assigned to other robots at the last meeting.
    """

    d: np.ndarray
    budget: float
    svp_keys: tuple = ()
    foreign: frozenset = field(default_factory=frozenset)
    positions: np.ndarray = None

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=float)
        self.foreign = frozenset(self.foreign)

    @property
    def svp_nodes(self):
        return range(2, len(self.d))

    def node_of(self, key):
        return self.svp_keys.index(key) + 2

    def scale(self, node):
        """Sum of d(node, j) over P_m and every known SVP."""
        return float(self.d[node, MEETING] + sum(self.d[node, j] for j in self.svp_nodes))

    def penalty(self, node):
        if node < 2 or self.svp_keys[node - 2] not in self.foreign:
            return 0.0
        return self.scale(node)

    def reward(self, node):
        return self.scale(node) if node >= 2 else 0.0


def penalty(node, instance):
    return instance.penalty(node)


@dataclass(frozen=True)
class LocalPlan:
    nodes: tuple
    travel: float
    penalty: float
    reward: float = 0.0
    svp_keys: tuple = ()

    @property
    def objective(self):
        return self.travel + self.penalty - self.reward

    @property
    def direct(self):
        return len(self.nodes) == 2


def _travel(d, middle):
    route = [START] + list(middle) + [MEETING]
    return float(sum(d[a, b] for a, b in zip(route, route[1:])))


def _make_plan(instance, middle):
    middle = [int(n) for n in middle]
    return LocalPlan(
        nodes=tuple([START] + middle + [MEETING]),
        travel=_travel(instance.d, middle),
        penalty=float(sum(instance.penalty(n) for n in middle)),
        reward=float(sum(instance.reward(n) for n in middle)),
        svp_keys=tuple(instance.svp_keys[n - 2] for n in middle),
    )


def _objective(instance, middle, weights):
    return _travel(weights, middle) + sum(instance.penalty(n) - instance.reward(n) for n in middle)


def solve_exact(instance):
    """Subset DP over (visited set, last node) minimising travel, then the objective."""
    d = instance.d
    nodes = list(instance.svp_nodes)
    m = len(nodes)
    full = 1 << m
    inf = math.inf
    f = [[inf] * m for _ in range(full)]
    parent = [[-1] * m for _ in range(full)]
    for i in range(m):
        f[1 << i][i] = d[START, nodes[i]]
    for mask in range(1, full):
        for last in range(m):
            value = f[mask][last]
            if value == inf or value > instance.budget + BUDGET_EPS:
                continue
            for nxt in range(m):
                bit = 1 << nxt
                if mask & bit:
                    continue
                candidate = value + d[nodes[last], nodes[nxt]]
                if candidate < f[mask | bit][nxt]:
                    f[mask | bit][nxt] = candidate
                    parent[mask | bit][nxt] = last

    best_value, best = d[START, MEETING], (0, -1)
    gains = [instance.penalty(n) - instance.reward(n) for n in nodes]
    for mask in range(1, full):
        net = sum(gains[i] for i in range(m) if mask & (1 << i))
        for last in range(m):
            if f[mask][last] == inf:
                continue
            travel = f[mask][last] + d[nodes[last], MEETING]
            if travel > instance.budget + BUDGET_EPS:
                continue
            value = travel + net
            if value < best_value - 1e-12:
                best_value, best = value, (mask, last)

    mask, last = best
    middle = []
    while mask:
        middle.append(nodes[last])
        previous = parent[mask][last]
        mask ^= 1 << last
        last = previous
    return _make_plan(instance, middle[::-1])


class LocalGuidedSearch:
    """Guided local search with insert, remove, relocate and 2-opt moves under the budget."""

    def __init__(self, instance, config=None):
        self.instance = instance
        self.config = config or get_config()
        self.d = instance.d
        self.penalty = np.zeros_like(self.d)

    def _feasible(self, middle):
        return _travel(self.d, middle) <= self.instance.budget + BUDGET_EPS

    def _neighbours(self, middle):
        outside = [n for n in self.instance.svp_nodes if n not in middle]
        for node in outside:
            for pos in range(len(middle) + 1):
                yield middle[:pos] + [node] + middle[pos:]
        for i in range(len(middle)):
            removed = middle[:i] + middle[i + 1:]
            yield removed
            for pos in range(len(removed) + 1):
                if pos != i:
                    yield removed[:pos] + [middle[i]] + removed[pos:]
        for i in range(len(middle) - 1):
            for j in range(i + 1, len(middle)):
                yield middle[:i] + middle[i:j + 1][::-1] + middle[j + 1:]

    def local_search(self, middle, weights):
        current = _objective(self.instance, middle, weights)
        while True:
            best = None
            for candidate in self._neighbours(middle):
                if not self._feasible(candidate):
                    continue
                value = _objective(self.instance, candidate, weights)
                if value < current - 1e-9 and (best is None or value < best[0]):
                    best = (value, candidate)
            if best is None:
                return middle
            current, middle = best

    def run(self, middle):
        middle = list(middle)
        middle = self.local_search(middle, self.d)
        best = list(middle)
        best_value = _objective(self.instance, best, self.d)
        route_arcs = max(len(middle) + 1, 1)
        lam = self.config.gls_lambda_factor * _travel(self.d, middle) / route_arcs
        stall = 0
        for _ in range(self.config.gls_max_iterations):
            route = [START] + middle + [MEETING]
            arcs = list(zip(route, route[1:]))
            u, v = max(arcs, key=lambda arc: (self.d[arc] / (1.0 + self.penalty[arc]), -arc[0], -arc[1]))
            self.penalty[u, v] += 1.0
            self.penalty[v, u] += 1.0
            middle = self.local_search(middle, self.d + lam * self.penalty)
            value = _objective(self.instance, middle, self.d)
            if value < best_value - 1e-9:
                best, best_value, stall = list(middle), value, 0
            else:
                stall += 1
                if stall >= self.config.gls_stall_rounds:
                    break
        return best


def _warm_middle(instance, warm_start):
    if warm_start is None:
        return []
    middle = [instance.node_of(key) for key in warm_start.svp_keys if key in instance.svp_keys]
    while middle and _travel(instance.d, middle) > instance.budget + BUDGET_EPS:
        middle.pop()
    return middle


def plan_local(instance, warm_start=None, config=None):
    """
    Minimise travel + penalty - reward from P_r to P_m within the budget.
    Small instances are solved exactly; larger ones by guided local search from
    the warm start (previous plan minus consumed SVPs).
    """
    config = config or get_config()
    direct = float(instance.d[START, MEETING])
    if direct > instance.budget + BUDGET_EPS:
        raise InfeasiblePlanError(
            f'Direct route {direct:.2f}s exceeds the budget {instance.budget:.2f}s.',
            direct=direct, budget=instance.budget,
        )
    n_svps = len(instance.svp_nodes)
    if n_svps == 0:
        return _make_plan(instance, [])
    if n_svps <= config.local_exact_cap:
        plan = solve_exact(instance)
    else:
        start = _warm_middle(instance, warm_start)
        plan = _make_plan(instance, LocalGuidedSearch(instance, config).run(start))
    if plan.travel > instance.budget + BUDGET_EPS:
        raise InfeasiblePlanError('Local plan exceeds its budget.', travel=plan.travel, budget=instance.budget)
    return plan


def travel_budget(t_cur, t_deadline, direct, dt, config=None):
    """
    Seconds of planned travel allowed before the rendezvous: the remaining time
    minus a proportional reserve and one tick, never below the direct route while
    the raw remaining time still covers it.
    """
    config = config or get_config()
    remaining = t_deadline - t_cur
    budget = remaining * (1.0 - config.deadline_reserve) - dt
    if budget < direct <= remaining:
        budget = direct
    return budget


def replan_trigger(known_keys, current_keys, slack, dt, config=None):
    """
    Replan when an SVP appeared or was consumed, or when the slack against the
    deadline drops under slack_min (a multiple of one tick).
    """
    config = config or get_config()
    known_keys, current_keys = set(known_keys), set(current_keys)
    if current_keys - known_keys:
        return True
    if known_keys - current_keys:
        return True
    return slack < config.slack_min_factor * dt
