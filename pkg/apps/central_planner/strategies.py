"""
Meeting Strategies
Hierarchical decision: fix the rendezvous node first, then route.
"""

import logging
import time
from dataclasses import dataclass

import numpy as np

from apps.core.conf import get_config
from apps.core.exceptions import NoRendezvousError, SolverLimitExceeded
from .routing import route_given_rendezvous

logger = logging.getLogger(__name__)

FURTHEST = 'furthest'
NEAREST = 'nearest'
SHORTEST = 'shortest'
STRATEGIES = (FURTHEST, NEAREST, SHORTEST)


def rendezvous_scores(cost):
    """d(p_v): summed robot travel time to each SVP node, in node order."""
    n = cost.n_robots
    nodes = list(cost.svp_nodes)
    return nodes, cost.d[:n, n:].sum(axis=0) if nodes else np.zeros(0)


def choose_rendezvous(cost, strategy=FURTHEST, config=None, deadline=None):
    """
    Rendezvous node under a strategy; ties go to the lowest node id.
    Shortest solves the routing for every candidate and keeps the cheapest; it
    raises SolverLimitExceeded when `deadline` (perf_counter seconds) passes.
    """
    nodes, scores = rendezvous_scores(cost)
    if not nodes:
        raise NoRendezvousError('No reachable super viewpoint to meet at.')
    if strategy == FURTHEST:
        return nodes[int(np.argmax(scores))]
    if strategy == NEAREST:
        return nodes[int(np.argmin(scores))]
    if strategy != SHORTEST:
        raise ValueError(f'Unknown meeting strategy {strategy!r}.')

    best = None
    for node in nodes:
        if deadline is not None and time.perf_counter() > deadline:
            raise SolverLimitExceeded('Shortest-meeting search ran out of time.')
        plan = route_given_rendezvous(cost, node, config)
        if best is None or plan.total_cost < best[0] - 1e-12:
            best = (plan.total_cost, node)
    return best[1]


@dataclass(frozen=True)
class MeetingDecision:
    plan: object
    strategy: str
    elapsed_s: float
    fallback: bool = False


def decide(cost, strategy=None, config=None):
    """
    Full central decision: rendezvous by strategy, then cheapest-arc + guided
    local search. Past the central time limit it falls back to Furthest with
    cheapest-arc routes.
    """
    config = config or get_config()
    strategy = strategy or config.strategy
    started = time.perf_counter()
    deadline = started + config.central_time_limit_s if config.central_time_limit_s else None
    try:
        rendezvous = choose_rendezvous(cost, strategy, config, deadline)
        plan = route_given_rendezvous(cost, rendezvous, config)
        fallback = deadline is not None and time.perf_counter() > deadline
        if fallback:
            raise SolverLimitExceeded('Central planner exceeded its time limit.')
    except SolverLimitExceeded as exc:
        logger.warning(f'{exc} Falling back to furthest meeting with cheapest-arc routes.')
        rendezvous = choose_rendezvous(cost, FURTHEST, config)
        plan = route_given_rendezvous(cost, rendezvous, config, refine=False)
        return MeetingDecision(plan, FURTHEST, time.perf_counter() - started, fallback=True)
    return MeetingDecision(plan, strategy, time.perf_counter() - started)
