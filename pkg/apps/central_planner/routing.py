"""
Rendezvous Routing
With the rendezvous fixed the joint problem is an open multi-vehicle routing
problem: every robot drives from its start to the rendezvous and every other SVP
is served exactly once. Cheapest-arc extension builds the start solution and
guided local search refines it.
"""

import logging
import time
from dataclasses import dataclass

import numpy as np

from apps.core.conf import get_config

logger = logging.getLogger(__name__)

IMPROVEMENT_EPS = 1e-9


@dataclass(frozen=True)
class RoutePlan:
    """Per-robot node sequences, each starting at the robot node and ending at the rendezvous."""

    routes: tuple
    costs: tuple
    rendezvous: int

    @property
    def total_cost(self):
        return float(sum(self.costs))

    @property
    def t_b(self):
        return float(max(self.costs)) if self.costs else 0.0

    def intermediate(self, k):
        return self.routes[k][1:-1]

    @classmethod
    def from_routes(cls, cost, routes, rendezvous):
        routes = tuple(tuple(int(n) for n in route) for route in routes)
        return cls(routes=routes, costs=tuple(cost.path_cost(r) for r in routes), rendezvous=int(rendezvous))


def _full(k, middle, rendezvous):
    return [k] + list(middle) + [rendezvous]


def cheapest_arc(cost, rendezvous):
    """
    Grow every route from its robot node by repeatedly appending the cheapest arc
    (last node of any route -> unserved SVP). Ties go to the lowest (robot, node).
    """
    n = cost.n_robots
    pending = [node for node in cost.svp_nodes if node != rendezvous]
    middles = [[] for _ in range(n)]
    while pending:
        best = None
        for k in range(n):
            last = middles[k][-1] if middles[k] else k
            for node in pending:
                candidate = (cost.d[last, node], k, node)
                if best is None or candidate < best:
                    best = candidate
        _, k, node = best
        middles[k].append(node)
        pending.remove(node)
    return [_full(k, middles[k], rendezvous) for k in range(n)]


class GuidedLocalSearch:
    """
    Arc-usage features with penalties; local search runs on d + lam * penalty
    over relocate, inter-route swap and intra-route 2-opt moves. The matrix is
    treated as symmetric for 2-opt.
    """

    def __init__(self, cost, config=None, max_iterations=None, time_limit_ms=None, stall_rounds=None):
        self.config = config or get_config()
        self.cost = cost
        self.d = cost.d
        self.max_iterations = max_iterations if max_iterations is not None else self.config.gls_max_iterations
        self.time_limit_ms = time_limit_ms if time_limit_ms is not None else self.config.gls_time_limit_ms
        self.stall_rounds = stall_rounds if stall_rounds is not None else self.config.gls_stall_rounds
        self.penalty = np.zeros_like(self.d)
        self.iterations = 0

    def _route_cost(self, w, route):
        return float(sum(w[a, b] for a, b in zip(route, route[1:])))

    def _total(self, w, routes):
        return sum(self._route_cost(w, route) for route in routes)

    # Moves: each returns (delta, apply) for the best improving candidate, or None

    def _best_relocate(self, w, routes):
        best = None
        for a, route_a in enumerate(routes):
            for i in range(1, len(route_a) - 1):
                x = route_a[i]
                removal = w[route_a[i - 1], route_a[i + 1]] - w[route_a[i - 1], x] - w[x, route_a[i + 1]]
                for b, route_b in enumerate(routes):
                    target = route_b if a != b else route_a[:i] + route_a[i + 1:]
                    for j in range(1, len(target)):
                        if a == b and j == i:
                            continue
                        u, z = target[j - 1], target[j]
                        delta = removal + w[u, x] + w[x, z] - w[u, z]
                        if delta < -IMPROVEMENT_EPS and (best is None or delta < best[0]):
                            best = (delta, ('relocate', a, i, b, j))
        return best

    def _best_swap(self, w, routes):
        best = None
        for a in range(len(routes)):
            ra = routes[a]
            for b in range(a + 1, len(routes)):
                rb = routes[b]
                for i in range(1, len(ra) - 1):
                    x, pa, qa = ra[i], ra[i - 1], ra[i + 1]
                    for j in range(1, len(rb) - 1):
                        y, pb, qb = rb[j], rb[j - 1], rb[j + 1]
                        delta = (w[pa, y] + w[y, qa] - w[pa, x] - w[x, qa]
                                 + w[pb, x] + w[x, qb] - w[pb, y] - w[y, qb])
                        if delta < -IMPROVEMENT_EPS and (best is None or delta < best[0]):
                            best = (delta, ('swap', a, i, b, j))
        return best

    def _best_two_opt(self, w, routes):
        best = None
        for r, route in enumerate(routes):
            last = len(route) - 2
            for i in range(1, last):
                for j in range(i + 1, last + 1):
                    delta = (w[route[i - 1], route[j]] + w[route[i], route[j + 1]]
                             - w[route[i - 1], route[i]] - w[route[j], route[j + 1]])
                    if delta < -IMPROVEMENT_EPS and (best is None or delta < best[0]):
                        best = (delta, ('two_opt', r, i, j, None))
        return best

    def _apply(self, routes, move):
        kind, a, i, b, j = move
        if kind == 'relocate':
            x = routes[a].pop(i)
            routes[b].insert(j, x)
        elif kind == 'swap':
            routes[a][i], routes[b][j] = routes[b][j], routes[a][i]
        else:
            routes[a][i:b + 1] = routes[a][i:b + 1][::-1]

    def local_search(self, w, routes, deadline=None):
        while True:
            if deadline is not None and time.perf_counter() > deadline:
                return routes
            candidates = [m for m in (self._best_relocate(w, routes), self._best_swap(w, routes),
                                      self._best_two_opt(w, routes)) if m is not None]
            if not candidates:
                return routes
            _, move = min(candidates, key=lambda c: c[0])
            self._apply(routes, move)

    def _penalize(self, routes):
        best = None
        for route in routes:
            for u, v in zip(route, route[1:]):
                utility = self.d[u, v] / (1.0 + self.penalty[u, v])
                key = (-utility, min(u, v), max(u, v))
                if best is None or key < best:
                    best = key
        if best is None:
            return False
        _, u, v = best
        self.penalty[u, v] += 1.0
        self.penalty[v, u] += 1.0
        return True

    def run(self, routes):
        routes = [list(route) for route in routes]
        deadline = None
        if self.time_limit_ms:
            deadline = time.perf_counter() + self.time_limit_ms / 1000.0

        routes = self.local_search(self.d, routes, deadline)
        best_routes = [list(r) for r in routes]
        best_cost = self._total(self.d, routes)
        arcs = sum(len(route) - 1 for route in routes)
        lam = self.config.gls_lambda_factor * best_cost / max(arcs, 1)

        stall = 0
        for self.iterations in range(1, self.max_iterations + 1):
            if deadline is not None and time.perf_counter() > deadline:
                break
            if not self._penalize(routes):
                break
            routes = self.local_search(self.d + lam * self.penalty, routes, deadline)
            current = self._total(self.d, routes)
            if current < best_cost - IMPROVEMENT_EPS:
                best_cost, best_routes, stall = current, [list(r) for r in routes], 0
            else:
                stall += 1
                if stall >= self.stall_rounds:
                    break
        return best_routes


def route_given_rendezvous(cost, rendezvous, config=None, refine=True, **limits):
    """
    Routes for every robot ending at `rendezvous` and covering every other SVP once.
    `refine=False` returns the cheapest-arc solution unchanged.
    """
    routes = cheapest_arc(cost, rendezvous)
    if refine and cost.n_svps > 1:
        routes = GuidedLocalSearch(cost, config, **limits).run(routes)
    return RoutePlan.from_routes(cost, routes, rendezvous)
