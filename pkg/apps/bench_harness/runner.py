"""
Exploration Run
One seeded simulation of a scenario under a coordination kind. Each tick:
sense, meet/merge/decide, plan, move. Once every robot is complete the team
gathers for a final meeting that empties the frontier set. The run doubles as
the `team` the mission protocol talks to.
"""

import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from apps.central_planner.cost import build_cost_matrix
from apps.central_planner.rendezvous import last_arrivals, rendezvous_time
from apps.central_planner.roadmap import Roadmap, motion_cost
from apps.central_planner.strategies import decide
from apps.core.exceptions import (
    DeadlineFault, DegenerateHullError, EmptyFrameError, InfeasiblePlanError, SimulationFault,
)
from apps.env_library.ledger import ByteLedger
from apps.env_library.library import EnvironmentLibrary
from apps.local_planner.planner import LocalInstance, LocalPlan, plan_local, replan_trigger, travel_budget
from apps.local_planner.trace import CENTRAL, DIRECT, LOCAL, PlanTrace
from apps.mission_protocol.missions import CentralOutcome
from apps.mission_protocol.protocol import MissionProtocol, select_host
from apps.mission_protocol.trace import ProtocolTrace
from apps.star_convex.polytope import build_polytope
from apps.star_convex.sampling import sample_frame, should_generate
from apps.world_sim.clock import SimClock
from apps.world_sim.comm import comm_graph, meeting_pairs
from apps.world_sim.events import COMPLETE, FRAME, HALT, EventLog, SimEvent
from apps.world_sim.navigation import grid_astar
from apps.world_sim.robots import step
from apps.world_sim.scenario import build_robots, build_world
from .baselines import CONTINUOUS, NO_COORD, OURS, greedy_target, keep_connected, leaders, normalize_kind
from .metrics import ObservationLog, compute_metrics

logger = logging.getLogger(__name__)


@dataclass
class Agent:
    """Per-robot planning state kept by the runner, next to the robot's library."""

    robot_id: int
    library: EnvironmentLibrary
    last_gen: np.ndarray = None
    plan: LocalPlan = None
    plan_t: float = 0.0
    warm_route: tuple = None
    foreign: frozenset = field(default_factory=frozenset)
    known_keys: frozenset = field(default_factory=frozenset)
    blocked: set = field(default_factory=set)
    goal: np.ndarray = None
    goal_key: tuple = None
    pending_retire: tuple = None
    rendezvous_sensed: int = None
    idle: bool = False

    @property
    def remaining_keys(self):
        return tuple(self.plan.svp_keys) if self.plan is not None else ()


@dataclass
class RunResult:
    metrics: object
    events: EventLog
    protocol_trace: ProtocolTrace
    plan_trace: PlanTrace
    ledger: ByteLedger
    trajectories: dict
    observations: ObservationLog
    orphan_frontiers: int = 0
    frontiers_left: int = 0
    sealed_frontiers: int = 0


class ExplorationRun:

    def __init__(self, scenario, kind=OURS, seed=None, config=None):
        self.scenario = scenario
        self.kind = normalize_kind(kind)
        self.seed = scenario.seed if seed is None else int(seed)
        if seed is not None and seed != scenario.seed:
            scenario = replace(scenario, seed=self.seed)
            self.scenario = scenario
        self.config = config or scenario.config()
        self.world = build_world(scenario)
        self.robots = build_robots(scenario)
        self.clock = SimClock(scenario.dt)
        self.dt = self.clock.dt

        tables = {}
        self.agents = {
            robot.id: Agent(robot.id, EnvironmentLibrary(robot.id, robot.sensor_range, self.config, self.seed, tables))
            for robot in self.robots
        }
        self.events = EventLog()
        self.protocol_trace = ProtocolTrace()
        self.plan_trace = PlanTrace()
        self.ledger = ByteLedger()
        self.observations = ObservationLog()
        self.protocol = MissionProtocol([r.id for r in self.robots], self.dt, self.config, self.protocol_trace)
        self.trajectories = {robot.id: [robot.position.copy()] for robot in self.robots}
        self.timings = {'central_s': [], 'local_s': []}
        self._links = set()
        self._empty_since = None
        self._synced_revision = {}
        self.sealed = 0
        self._stranded = set()

    # Team interface used by the mission protocol

    def robot(self, robot_id):
        return next(robot for robot in self.robots if robot.id == robot_id)

    def position(self, robot_id):
        return self.robot(robot_id).position

    def comm_range(self, robot_id):
        return self.robot(robot_id).comm_range

    def ready(self, robot_id):
        agent = self.agents[robot_id]
        return not agent.remaining_keys and agent.goal_key is None

    def motion_cost(self, robot_id, position):
        robot = self.robot(robot_id)
        return motion_cost(Roadmap(self.agents[robot_id].library), robot.position, position, robot.v_max)

    def exchange(self, host, members, t):
        """Members stream their deltas to the host, the host streams the merged library back."""
        host_library = self.agents[host].library
        received = []
        for member in sorted(set(members) - {host}):
            payload = self.agents[member].library.serialize_for(host)
            self.ledger.record(t, member, host, len(payload))
            received.append((member, payload))
        host_library.merge(received)
        self._broadcast(host, members, t)

    def _broadcast(self, host, members, t):
        host_library = self.agents[host].library
        for member in sorted(set(members) - {host}):
            library = self.agents[member].library
            payload = host_library.serialize_for(member)
            self.ledger.record(t, host, member, len(payload))
            library.merge([(host, payload)], prefer_incoming=True)
            host_library.mark_synced(member)
            library.mark_synced(host)

    def seal(self, host, members, t):
        """
        The host takes one more frame that retires every frontier left in its merged
        library, then pushes it to the members. Returns the number of frontiers sealed.
        """
        agent = self.agents[host]
        left = len(agent.library.frontiers)
        if not left:
            return 0
        robot = self.robot(host)
        try:
            polytope = agent.library.seal(self._take_frame(robot, agent.library))
        except (EmptyFrameError, DegenerateHullError) as exc:
            logger.error(f'Robot {host}: sealing frame failed at t={t:.1f}: {exc}')
            return 0
        agent.last_gen = robot.position.copy()
        self._record_frame(robot, polytope, t, isolated=len(members) == 1)
        self._broadcast(host, members, t)
        self.sealed += left
        return left

    def plan(self, robot_ids, t, last_missions):
        """Central decision over the host's merged library; None when no SVP is reachable."""
        robot_ids = sorted(robot_ids)
        library = self.agents[robot_ids[0]].library
        blocked = set().union(*(self.agents[r].blocked for r in robot_ids))
        svps = [svp for svp in library.svps if svp.key not in blocked]
        if not svps:
            return None
        robots = [self.robot(r) for r in robot_ids]
        roadmap = Roadmap(library)
        cost = build_cost_matrix(roadmap, robots, svps)
        if cost.n_svps == 0:
            return None
        decision = decide(cost, config=self.config)
        self.timings['central_s'].append(decision.elapsed_s)

        plan = decision.plan
        p_c = cost.positions[plan.rendezvous]
        v_max = min(robot.v_max for robot in robots)
        arrivals = last_arrivals(last_missions, p_c, lambda a, b: motion_cost(roadmap, a, b, v_max))
        t_c = rendezvous_time(plan.t_b, t, self.config.extra_time_s, arrivals)
        routes = {
            robot_id: tuple(cost.svp_key(node) for node in plan.intermediate(k))
            for k, robot_id in enumerate(cost.robot_ids)
        }
        return CentralOutcome(
            position=p_c,
            deadline=t_c,
            rendezvous_key=cost.svp_key(plan.rendezvous),
            routes=routes,
            costs={robot_id: plan.costs[k] for k, robot_id in enumerate(cost.robot_ids)},
            strategy=decision.strategy,
            elapsed_s=decision.elapsed_s,
            fallback=decision.fallback,
        )

    # Sensing

    def _take_frame(self, robot, library):
        samples = sample_frame(self.world, robot, self.config)
        return build_polytope(samples, robot.position, self.config.flip_radius(robot.sensor_range),
                              library.next_polytope_id())

    def _record_frame(self, robot, polytope, t, isolated):
        self.events.append(SimEvent(t, robot.id, FRAME, str(polytope.id)))
        self.observations.record(t, robot.id, self._observed_cells(self.agents[robot.id].library, polytope, robot),
                                 isolated)

    def _sense(self, robot, t, isolated):
        agent = self.agents[robot.id]
        retire = agent.pending_retire or ()
        agent.pending_retire = None
        agent.last_gen = robot.position.copy()
        try:
            polytope = self._take_frame(robot, agent.library)
        except (EmptyFrameError, DegenerateHullError) as exc:
            logger.warning(f'Robot {robot.id}: frame skipped at t={t:.1f}: {exc}')
            if retire:
                agent.blocked.add(tuple(retire))
            return None
        polytope = agent.library.observe(polytope, retire_clusters=retire)
        self._record_frame(robot, polytope, t, isolated)
        return polytope

    def _observed_cells(self, library, polytope, robot):
        world = self.world
        reach = robot.sensor_range
        lo = np.clip(world.cells_of([robot.position - reach])[0], 0, world.dims - 1)
        hi = np.clip(world.cells_of([robot.position + reach])[0], 0, world.dims - 1)
        grids = np.meshgrid(*[np.arange(lo[a], hi[a] + 1) for a in range(3)], indexing='ij')
        cells = np.stack([g.ravel() for g in grids], axis=1)
        cells = cells[~world.occupancy[cells[:, 0], cells[:, 1], cells[:, 2]]]
        if len(cells) == 0:
            return np.zeros(0, dtype=np.int64)
        centers = world.origin + (cells + 0.5) * world.resolution
        inside = library.mesh_table(polytope).contains(centers)
        return np.ravel_multi_index(tuple(cells[inside].T), tuple(world.dims))

    def _sense_all(self, t):
        isolated = {r for component in comm_graph(self.robots) if len(component) == 1 for r in component}
        for robot in self.robots:
            agent = self.agents[robot.id]
            if agent.idle:
                continue
            if agent.pending_retire is not None or should_generate(robot, agent.last_gen, self.config):
                self._sense(robot, t, robot.id in isolated)

    # Local planning

    def _local_instance(self, agent, robot, mission):
        library = agent.library
        svps = [s for s in library.svps if s.key != mission.rendezvous_key and s.key not in agent.blocked]
        points = np.array([robot.position, mission.position] + [s.target for s in svps]).reshape(-1, 3)
        lengths = Roadmap(library).distances(points)
        keep = [0, 1] + [j for j in range(2, len(points))
                         if np.isfinite(lengths[0, j]) and np.isfinite(lengths[j, 1])]
        d = lengths[np.ix_(keep, keep)] / robot.v_max
        if not np.isfinite(d[0, 1]):
            d[0, 1] = d[1, 0] = float(np.linalg.norm(points[0] - points[1])) / robot.v_max
        keys = tuple(svps[j - 2].key for j in keep[2:])
        return LocalInstance(d=d, budget=0.0, svp_keys=keys, foreign=agent.foreign & set(keys), positions=points[keep])

    def _replan(self, robot, t, source=LOCAL):
        agent = self.agents[robot.id]
        mission = self.protocol.mission_of(robot.id)
        if mission is None:
            return
        instance = self._local_instance(agent, robot, mission)
        direct = float(instance.d[0, 1])
        instance.budget = travel_budget(t, mission.deadline, direct, self.dt, self.config)
        warm = LocalPlan((), 0.0, 0.0, svp_keys=agent.warm_route or agent.remaining_keys)
        agent.warm_route = None
        started = time.perf_counter()
        try:
            plan = plan_local(instance, warm_start=warm, config=self.config)
        except InfeasiblePlanError as exc:
            logger.warning(f'Robot {robot.id}: {exc} Heading straight to the rendezvous.')
            plan = LocalPlan((0, 1), direct, 0.0)
            source = DIRECT
        self.timings['local_s'].append(time.perf_counter() - started)
        agent.plan, agent.plan_t = plan, t
        agent.known_keys = frozenset(agent.library.svp_keys())
        self.plan_trace.log(t, robot.id, source, plan.svp_keys, plan.travel, instance.budget)
        self._set_goal(agent)

    def _slack(self, agent, robot, mission, t):
        """Time to spare if the rest of the current plan is driven as estimated."""
        remaining = mission.deadline - t
        planned = max(agent.plan.travel - (t - agent.plan_t), 0.0) if agent.plan is not None else 0.0
        return remaining - planned

    def _set_goal(self, agent):
        mission = self.protocol.mission_of(agent.robot_id)
        by_key = {svp.key: svp for svp in agent.library.svps}
        keys = [key for key in agent.remaining_keys if key in by_key]
        if keys:
            goal, goal_key = by_key[keys[0]].target, keys[0]
        elif mission is not None:
            goal, goal_key = mission.position, None
        else:
            goal, goal_key = None, None
        changed = goal_key != agent.goal_key or (
            goal is not None and (agent.goal is None or not np.array_equal(goal, agent.goal))
        )
        agent.goal, agent.goal_key = goal, goal_key
        if changed:
            self._route_to_goal(agent)

    def _route_to_goal(self, agent):
        index = next(i for i, robot in enumerate(self.robots) if robot.id == agent.robot_id)
        robot = self.robots[index]
        if agent.goal is None:
            self.robots[index] = robot.with_path(())
            return
        waypoints, _ = grid_astar(self.world, robot.position, agent.goal)
        if waypoints is None:
            logger.warning(f'Robot {robot.id}: goal {tuple(np.round(agent.goal, 2))} unreachable on the grid')
            if agent.goal_key is not None:
                agent.blocked.add(agent.goal_key)
                agent.plan = None
            agent.goal, agent.goal_key = None, None
            self.robots[index] = robot.with_path(())
            return
        self.robots[index] = robot.with_path(waypoints[1:])

    def _plan_ours(self, t, fresh):
        for robot in self.robots:
            agent = self.agents[robot.id]
            mission = self.protocol.mission_of(robot.id)
            if mission is None or agent.idle:
                continue
            if robot.id in fresh or agent.plan is None:
                self._replan(robot, t, CENTRAL if robot.id in fresh else LOCAL)
                continue
            current = agent.library.svp_keys() - {mission.rendezvous_key} - agent.blocked
            known = agent.known_keys - {mission.rendezvous_key} - agent.blocked
            slack = self._slack(agent, robot, mission, t)
            if not replan_trigger(known, current, slack, self.dt, self.config):
                continue
            if agent.plan.direct and current == known:
                continue
            self._replan(robot, t)

    # Meetings

    def _apply_outcome(self, outcome):
        fresh = set()
        for robot_id in sorted(outcome.complete):
            agent = self.agents[robot_id]
            agent.idle, agent.plan, agent.goal, agent.goal_key = True, None, None, None
            self._route_to_goal(agent)
        for decision in outcome.decisions:
            for robot_id, route in sorted(decision.routes.items()):
                if robot_id not in outcome.missions:
                    continue
                agent = self.agents[robot_id]
                agent.idle = False
                agent.warm_route = route
                agent.plan = None
                agent.foreign = frozenset(
                    key for other, keys in decision.routes.items() if other != robot_id for key in keys
                )
                fresh.add(robot_id)
        return fresh

    def _meetings_ours(self, t):
        links = set(meeting_pairs(self.robots))
        new_links = links - self._links
        self._links = links
        fresh = set()
        for component in comm_graph(self.robots):
            members = sorted(component)
            active = [r for r in members if r not in self.protocol.complete]
            if not active:
                continue
            new_link = any(a in component and b in component for a, b in new_links)
            unassigned = any(self.protocol.mission_of(r) is None for r in active)
            scheduled = any(
                self.protocol.is_scheduled(mission, component, self, t)
                for mission in {self.protocol.mission_of(r) for r in active} - {None}
            )
            if new_link or unassigned or scheduled:
                outcome = self.protocol.on_meeting(component, t, self)
                fresh |= self._apply_outcome(outcome)
                for robot_id in outcome.complete:
                    self.events.append(SimEvent(t, robot_id, COMPLETE))
        if self.protocol.finished and not self.protocol.halted:
            fresh |= self._final_meeting(t)
        self.protocol.check_deadlines(t)
        return fresh

    def _final_meeting(self, t):
        """
        Complete robots gather at the host. Once the team forms one radio component
        the protocol holds the final meeting.
        """
        components = comm_graph(self.robots)
        if len(components) == 1:
            outcome = self.protocol.on_final_meeting(components[0], t, self)
            if outcome.halted:
                self.events.append(SimEvent(t, outcome.host, HALT))
            return self._apply_outcome(outcome)
        host = select_host(self.agents)
        target = self.position(host)
        for robot_id, agent in sorted(self.agents.items()):
            if robot_id == host or robot_id in self._stranded or agent.goal is not None:
                continue
            agent.goal, agent.goal_key = target.copy(), None
            self._route_to_goal(agent)
            if agent.goal is None:
                self._stranded.add(robot_id)
        return set()

    # Baselines

    def _greedy_goal(self, robot):
        agent = self.agents[robot.id]
        svp = greedy_target(agent.library, robot, agent.blocked)
        if svp is None:
            agent.goal, agent.goal_key = None, None
            agent.idle = not agent.library.svps or all(s.key in agent.blocked for s in agent.library.svps)
            self._route_to_goal(agent)
            return
        agent.idle = False
        if svp.key != agent.goal_key:
            agent.goal, agent.goal_key = svp.target, svp.key
            self._route_to_goal(agent)

    def _plan_no_coord(self):
        for robot in self.robots:
            agent = self.agents[robot.id]
            if agent.goal_key is None or agent.goal_key not in agent.library.svp_keys():
                self._greedy_goal(robot)

    def _plan_continuous(self, t):
        leader_of = leaders(self.robots)
        for component in comm_graph(self.robots):
            members = sorted(component)
            if len(members) > 1:
                revisions = {r: self.agents[r].library.revision for r in members}
                if any(revisions[r] != self._synced_revision.get(r) for r in members):
                    self.exchange(members[0], members, t)
                    self._synced_revision.update({r: self.agents[r].library.revision for r in members})
        for robot in list(self.robots):
            agent = self.agents[robot.id]
            leader = leader_of[robot.id]
            if leader == robot.id:
                if agent.goal_key is None or agent.goal_key not in agent.library.svp_keys():
                    self._greedy_goal(robot)
            else:
                agent.goal_key = None
                agent.idle = self.agents[leader].idle
                agent.goal = None if agent.idle else self.robot(leader).position.copy()
                self._route_to_goal(agent)

    # Arrival

    def _on_arrivals(self, before):
        was_moving = {robot.id for robot in before if robot.is_moving}
        for robot in self.robots:
            if robot.id not in was_moving or robot.is_moving:
                continue
            agent = self.agents[robot.id]
            if agent.goal_key is not None:
                agent.pending_retire = agent.goal_key
                if agent.plan is not None:
                    keys = tuple(k for k in agent.plan.svp_keys if k != agent.goal_key)
                    agent.plan = LocalPlan(agent.plan.nodes, agent.plan.travel, agent.plan.penalty,
                                           agent.plan.reward, keys)
                agent.goal_key = None
                agent.goal = None
                if self.kind == OURS:
                    self._set_goal(agent)
                continue
            mission = self.protocol.mission_of(robot.id)
            if mission is not None and agent.rendezvous_sensed != mission.id:
                agent.rendezvous_sensed = mission.id
                if mission.rendezvous_key in agent.library.svp_keys():
                    agent.pending_retire = mission.rendezvous_key

    # Main loop

    def _any_svp(self):
        return any(agent.library.svps for agent in self.agents.values())

    def _finished(self):
        if self.kind == OURS:
            return self.protocol.halted
        return all(agent.idle and not agent.goal_key for agent in self.agents.values())

    def frontiers_left(self):
        return max(len(agent.library.frontiers) for agent in self.agents.values())

    def raw_cloud_bytes(self):
        per_frame = int(round(360.0 / self.config.raw_cloud_azimuth_step_deg)) * self.config.raw_cloud_rings * 12
        return per_frame * len(self.observations)

    def run(self):
        fault = ''
        complete = False
        logger.info(f'Run {self.scenario.name} [{self.kind}] seed={self.seed} with {len(self.robots)} robots')
        try:
            while self.clock.tick < self.config.tick_cap:
                t = self.clock.t_cur
                self._sense_all(t)
                if self.kind == OURS:
                    fresh = self._meetings_ours(t)
                    self._plan_ours(t, fresh)
                elif self.kind == NO_COORD:
                    self._plan_no_coord()
                else:
                    self._plan_continuous(t)

                if self._any_svp():
                    self._empty_since = None
                elif self._empty_since is None:
                    self._empty_since = t

                if self._finished():
                    if self.kind != OURS:
                        for robot_id in sorted(self.agents):
                            self.seal(robot_id, [robot_id], t)
                    complete = self.frontiers_left() == 0
                    break

                before = list(self.robots)
                deadlines = self.protocol.deadlines() if self.kind == OURS else None
                moved, events, _ = step(self.world, self.robots, self.dt, t, deadlines=deadlines)
                if self.kind == CONTINUOUS:
                    moved = keep_connected(before, moved)
                self.robots = moved
                self.events.extend(events)
                self._on_arrivals(before)
                self.clock.advance()
                for robot in self.robots:
                    self.trajectories[robot.id].append(robot.position.copy())
        except (DeadlineFault, SimulationFault) as exc:
            fault = str(exc)
            logger.error(f'Run {self.scenario.name} [{self.kind}] seed={self.seed} faulted: {fault}')

        if not complete and not fault:
            if self.clock.tick < self.config.tick_cap:
                logger.warning(f'Run {self.scenario.name} [{self.kind}] seed={self.seed} ended with frontiers left')
            else:
                logger.warning(f'Run {self.scenario.name} [{self.kind}] seed={self.seed} hit the tick cap')
        return self._result(complete, fault)

    def _result(self, complete, fault):
        t_end = self.clock.t_cur
        exploration_time = self._empty_since if self._empty_since is not None else t_end
        orphans = len(set().union(*(agent.library.orphan_ids() for agent in self.agents.values())))
        metrics = compute_metrics(
            self.observations, self.trajectories, self.ledger,
            scenario=self.scenario.name,
            strategy=self.kind,
            seed=self.seed,
            exploration_time=exploration_time,
            reachable_cells=self.world.free_count,
            ticks=self.clock.tick,
            complete=complete,
            raw_cloud_bytes=self.raw_cloud_bytes(),
            fault=fault,
            timings=self.timings,
        )
        if orphans:
            logger.info(f'{orphans} viewpoint-less frontier clusters left at the end of the run')
        if self.sealed:
            logger.info(f'{self.sealed} frontiers without a reachable viewpoint were sealed')
        if math.isfinite(exploration_time):
            logger.info(f'Run {self.scenario.name} [{self.kind}] seed={self.seed}: explored in {exploration_time:.1f}s')
        return RunResult(
            metrics=metrics,
            events=self.events,
            protocol_trace=self.protocol_trace,
            plan_trace=self.plan_trace,
            ledger=self.ledger,
            trajectories=self.trajectories,
            observations=self.observations,
            orphan_frontiers=orphans,
            frontiers_left=self.frontiers_left(),
            sealed_frontiers=self.sealed,
        )


def run_scenario(scenario, kind=OURS, seed=None, config=None):
    return ExplorationRun(scenario, kind, seed, config).run()
