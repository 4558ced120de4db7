"""
Oracles
Brute-force references shared by the `verify` command and the test suites.
Each check returns a count of violations (0 when the fast path agrees).
"""

import itertools
import logging
import math

import numpy as np

from apps.central_planner.cost import euclidean_cost_matrix
from apps.central_planner.exact import check_decision, solve_exact
from apps.core.exceptions import DegenerateHullError, EmptyFrameError
from apps.env_library.library import EnvironmentLibrary
from apps.frontier_sfi.mesh_table import MeshTable
from apps.local_planner.planner import LocalInstance, solve_exact as solve_local_exact
from apps.star_convex.polytope import build_polytope, flip
from apps.star_convex.sampling import sample_frame
from apps.world_sim.robots import RobotState
from apps.world_sim.world import VoxelWorld

logger = logging.getLogger(__name__)


# Geometry

def random_world(rng, size=(20.0, 20.0, 3.0), resolution=0.5, boxes=8):
    world = VoxelWorld.empty(size, resolution)
    for _ in range(boxes):
        side = rng.uniform(1.0, 3.0, size=2)
        corner = rng.uniform(0.0, 1.0, size=2) * (np.asarray(size[:2]) - side)
        world.fill_box([corner[0], corner[1], 0.0], [corner[0] + side[0], corner[1] + side[1], size[2]])
    return world


def random_polytopes(count, rng, config=None, sensor_range=6.0):
    """Polytopes of frames taken at random free spots of random box worlds."""
    polytopes = []
    attempts = 0
    while len(polytopes) < count and attempts < count * 20:
        attempts += 1
        world = random_world(rng)
        free = np.argwhere(~world.occupancy[:, :, 2])
        if len(free) == 0:
            continue
        cell = free[rng.integers(len(free))]
        position = world.cell_center((int(cell[0]), int(cell[1]), 2))
        robot = RobotState(id=0, position=position, yaw=float(rng.uniform(-math.pi, math.pi)),
                           sensor_range=sensor_range, fov_v=math.radians(40.0))
        try:
            samples = sample_frame(world, robot, config)
            polytopes.append(build_polytope(samples, position, 2.0 * sensor_range, len(polytopes)))
        except (EmptyFrameError, DegenerateHullError):
            continue
    return polytopes


def flip_violations(rng, trials=1000, rel_tol=1e-9):
    """Points whose double flip does not return them."""
    violations = 0
    for _ in range(trials):
        origin = rng.uniform(-10.0, 10.0, size=3)
        radius = float(rng.uniform(0.5, 20.0))
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        point = origin + direction * rng.uniform(1e-3, 2 * radius - 1e-3)
        back = flip(flip(point, origin, radius), origin, radius)
        if not np.allclose(back, point, rtol=rel_tol, atol=rel_tol * np.abs(point).max()):
            violations += 1
    return violations


def star_violations(polytope, rng, rays=1000, steps=16):
    """Contained points with a contained-then-escaped segment back to the origin."""
    directions = rng.normal(size=(rays, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    ends = polytope.origin + directions * rng.uniform(0.0, polytope.max_extent, size=(rays, 1))
    inside = polytope.contains(ends)
    violations = 0
    fractions = np.linspace(0.0, 1.0, steps)
    for end in ends[inside]:
        samples = polytope.origin + fractions[:, None] * (end - polytope.origin)
        if not polytope.contains(samples).all():
            violations += 1
    return violations


def mesh_table_mismatches(polytope, points, cell_deg=2.0):
    """Points where the MeshTable and the all-tetrahedra test disagree."""
    table = MeshTable(polytope, cell_deg)
    return int(np.count_nonzero(table.contains(points) != polytope.contains(points)))


def scatter_points(polytope, rng, count=10000):
    scale = polytope.max_extent * 1.2
    return polytope.origin + rng.uniform(-scale, scale, size=(count, 3))


# Frontier soundness

def frontier_violations(library):
    """Live frontiers whose center lies in a polytope other than their parent."""
    violations = 0
    polytopes = library.sorted_polytopes()
    for frontier in library.live_frontiers():
        for polytope in polytopes:
            if polytope.id == frontier.polytope_id:
                continue
            if polytope.contains(frontier.center[None, :])[0]:
                violations += 1
                break
    return violations


# Routing

def enumerate_joint(cost):
    """Exhaustive minimum of the summed route cost over rendezvous, assignment and order."""
    n, d = cost.n_robots, cost.d
    best = math.inf
    for rendezvous in cost.svp_nodes:
        others = [node for node in cost.svp_nodes if node != rendezvous]
        memo = {}

        def best_path(k, subset):
            key = (k, subset)
            if key not in memo:
                memo[key] = min(
                    sum(d[a, b] for a, b in zip((k,) + order, order + (rendezvous,)))
                    for order in itertools.permutations(subset)
                )
            return memo[key]

        for assignment in itertools.product(range(n), repeat=len(others)):
            total = 0.0
            for k in range(n):
                total += best_path(k, tuple(node for node, owner in zip(others, assignment) if owner == k))
            best = min(best, total)
    return best


def random_joint_instance(rng, max_robots=3, max_svps=8):
    n = int(rng.integers(1, max_robots + 1))
    m = int(rng.integers(1, max_svps + 1))
    return euclidean_cost_matrix(rng.uniform(0, 30, size=(n, 3)), rng.uniform(0, 30, size=(m, 3)))


def joint_mismatches(rng, instances=100, config=None):
    mismatches = 0
    for _ in range(instances):
        cost = random_joint_instance(rng)
        decision, _ = solve_exact(cost, config=config)
        if check_decision(cost, decision):
            mismatches += 1
            continue
        if not math.isclose(decision.objective, enumerate_joint(cost), rel_tol=1e-9, abs_tol=1e-9):
            mismatches += 1
    return mismatches


def enumerate_local(instance):
    """Minimum of travel + penalty - reward over every subset order within the budget."""
    d = instance.d
    nodes = list(instance.svp_nodes)
    best = d[0, 1]
    for size in range(1, len(nodes) + 1):
        for order in itertools.permutations(nodes, size):
            route = (0,) + order + (1,)
            travel = sum(d[a, b] for a, b in zip(route, route[1:]))
            if travel > instance.budget + 1e-9:
                continue
            value = travel + sum(instance.penalty(n) - instance.reward(n) for n in order)
            best = min(best, value)
    return best


def random_local_instance(rng, max_svps=6):
    m = int(rng.integers(0, max_svps + 1))
    points = rng.uniform(0, 20, size=(m + 2, 3))
    d = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2)
    keys = tuple((i,) for i in range(m))
    foreign = frozenset(key for key in keys if rng.random() < 0.3)
    budget = d[0, 1] * float(rng.uniform(1.0, 4.0))
    return LocalInstance(d=d, budget=budget, svp_keys=keys, foreign=foreign, positions=points)


def local_mismatches(rng, instances=100):
    mismatches = 0
    for _ in range(instances):
        instance = random_local_instance(rng)
        plan = solve_local_exact(instance)
        if plan.travel > instance.budget + 1e-9:
            mismatches += 1
            continue
        if not math.isclose(plan.objective, enumerate_local(instance), rel_tol=1e-9, abs_tol=1e-9):
            mismatches += 1
    return mismatches


def merge_soundness_violations(rng, robots=3, frames=4, config=None, sensor_range=6.0):
    """
    Robots observe the same random world from their own spots, then merge pairwise
    in a chain; the frontier check runs on the receiver after every merge.
    """
    world = random_world(rng)
    free = np.argwhere(~world.occupancy[:, :, 2])
    tables = {}
    libraries = [EnvironmentLibrary(r, sensor_range, config, seed=0, tables=tables) for r in range(robots)]
    for library in libraries:
        for _ in range(frames):
            cell = free[rng.integers(len(free))]
            position = world.cell_center((int(cell[0]), int(cell[1]), 2))
            robot = RobotState(id=library.owner, position=position, sensor_range=sensor_range,
                               fov_v=math.radians(40.0))
            try:
                samples = sample_frame(world, robot, config)
                polytope = build_polytope(samples, position, 2.0 * sensor_range, library.next_polytope_id())
            except (EmptyFrameError, DegenerateHullError):
                continue
            library.observe(polytope)

    violations = 0
    for sender, receiver in zip(libraries, libraries[1:] + libraries[:1]):
        receiver.merge([(sender.owner, sender.serialize_for(receiver.owner))])
        violations += frontier_violations(receiver)
    return violations
