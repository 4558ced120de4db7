import math
import os
import tempfile

import numpy as np
from django.test import SimpleTestCase

from apps.bench_harness.oracles import enumerate_joint, joint_mismatches, random_joint_instance
from apps.central_planner.cost import ROBOT, SVP, euclidean_cost_matrix
from apps.central_planner.exact import Decision, check_decision, solve_exact, solve_given_rendezvous
from apps.central_planner.instance_io import dump_instance, load_instance
from apps.central_planner.rendezvous import last_arrivals, rendezvous_time
from apps.central_planner.routing import GuidedLocalSearch, RoutePlan, cheapest_arc, route_given_rendezvous
from apps.central_planner.strategies import (
    FURTHEST, NEAREST, SHORTEST, choose_rendezvous, decide, rendezvous_scores,
)
from apps.core.conf import get_config
from apps.core.exceptions import NoRendezvousError, ScenarioError, SolverLimitExceeded


def line_instance():
    # robots at x=0 and x=10, SVPs at x=1, 4, 9, 20
    robots = [[0.0, 0.0, 0.0], [10.0, 0.0, 0.0]]
    svps = [[1.0, 0.0, 0.0], [4.0, 0.0, 0.0], [9.0, 0.0, 0.0], [20.0, 0.0, 0.0]]
    return euclidean_cost_matrix(robots, svps)


def assert_valid_plan(test, cost, plan):
    served = [node for k in range(cost.n_robots) for node in plan.intermediate(k)]
    expected = [node for node in cost.svp_nodes if node != plan.rendezvous]
    test.assertEqual(sorted(served), expected)
    for k, route in enumerate(plan.routes):
        test.assertEqual(route[0], k)
        test.assertEqual(route[-1], plan.rendezvous)
    test.assertEqual(check_decision(cost, Decision.from_plan(cost, plan)), [])


class CostMatrixTests(SimpleTestCase):

    def test_node_layout(self):
        cost = line_instance()
        self.assertEqual((cost.n_robots, cost.n_svps, cost.size), (2, 4, 6))
        self.assertEqual(cost.kind(1), ROBOT)
        self.assertEqual(cost.kind(2), SVP)
        self.assertEqual(cost.path_cost([0, 2, 3]), 4.0)

    def test_restricted_keeps_robots_and_keys(self):
        cost = line_instance()
        sub = cost.restricted([3, 5])
        self.assertEqual(sub.size, 4)
        self.assertEqual(sub.svp_keys, (1, 3))
        self.assertEqual(sub.d[2, 3], 16.0)

    def test_speed_scales_the_matrix(self):
        cost = euclidean_cost_matrix([[0.0, 0.0, 0.0]], [[6.0, 0.0, 0.0]], v_max=2.0)
        self.assertEqual(cost.d[0, 1], 3.0)


class CheapestArcTests(SimpleTestCase):

    def test_every_svp_served_once(self):
        cost = line_instance()
        routes = cheapest_arc(cost, 5)
        plan = RoutePlan.from_routes(cost, routes, 5)
        assert_valid_plan(self, cost, plan)

    def test_nearest_arcs_are_taken_first(self):
        cost = line_instance()
        routes = cheapest_arc(cost, 5)
        self.assertEqual(routes[0][:2], [0, 2])
        self.assertEqual(routes[1][:2], [1, 4])

    def test_single_svp_routes_go_straight_to_the_rendezvous(self):
        cost = euclidean_cost_matrix([[0.0, 0.0, 0.0], [5.0, 0.0, 0.0]], [[2.0, 0.0, 0.0]])
        self.assertEqual(cheapest_arc(cost, 2), [[0, 2], [1, 2]])


class GuidedLocalSearchTests(SimpleTestCase):

    def setUp(self):
        self.config = get_config(gls_time_limit_ms=0.0, gls_max_iterations=200)

    def test_never_worse_than_the_start_and_never_better_than_optimal(self):
        rng = np.random.default_rng(21)
        for _ in range(15):
            cost = random_joint_instance(rng, max_robots=3, max_svps=7)
            rendezvous = cost.n_robots
            start = RoutePlan.from_routes(cost, cheapest_arc(cost, rendezvous), rendezvous)
            refined = route_given_rendezvous(cost, rendezvous, self.config)
            optimum, _ = solve_given_rendezvous(cost, rendezvous)
            assert_valid_plan(self, cost, refined)
            self.assertLessEqual(refined.total_cost, start.total_cost + 1e-9)
            self.assertGreaterEqual(refined.total_cost, optimum - 1e-9)

    def test_untangles_a_crossed_route(self):
        robots = [[0.0, 0.0, 0.0]]
        svps = [[3.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [4.0, 0.0, 0.0]]
        cost = euclidean_cost_matrix(robots, svps)
        routes = GuidedLocalSearch(cost, self.config).run([[0, 1, 2, 3, 4]])
        self.assertEqual(RoutePlan.from_routes(cost, routes, 4).total_cost, 4.0)

    def test_is_deterministic_without_a_time_limit(self):
        cost = random_joint_instance(np.random.default_rng(4), max_robots=3, max_svps=8)
        first = route_given_rendezvous(cost, cost.n_robots, self.config)
        second = route_given_rendezvous(cost, cost.n_robots, self.config)
        self.assertEqual(first.routes, second.routes)


class ExactSolverTests(SimpleTestCase):

    def test_matches_exhaustive_enumeration(self):
        self.assertEqual(joint_mismatches(np.random.default_rng(17), instances=25), 0)

    def test_line_instance_optimum(self):
        cost = line_instance()
        decision, plan = solve_exact(cost)
        self.assertAlmostEqual(decision.objective, enumerate_joint(cost))
        assert_valid_plan(self, cost, plan)

    def test_refuses_instances_above_the_cap(self):
        cost = euclidean_cost_matrix([[0.0, 0.0, 0.0]], np.arange(15).reshape(5, 3))
        with self.assertRaises(SolverLimitExceeded):
            solve_exact(cost, config=get_config(exact_cap=4))

    def test_no_svp_means_no_rendezvous(self):
        cost = euclidean_cost_matrix([[0.0, 0.0, 0.0]], np.zeros((0, 3)))
        with self.assertRaises(NoRendezvousError):
            solve_exact(cost)

    def test_check_decision_flags_broken_flow(self):
        cost = line_instance()
        decision, _ = solve_exact(cost)
        decision.t[:] = 0
        self.assertIn('rendezvous must be exactly one SVP node', check_decision(cost, decision))


class StrategyTests(SimpleTestCase):

    def setUp(self):
        self.config = get_config(gls_time_limit_ms=0.0, gls_max_iterations=200, central_time_limit_s=0.0)

    def test_scores_sum_robot_travel(self):
        nodes, scores = rendezvous_scores(line_instance())
        self.assertEqual(list(nodes), [2, 3, 4, 5])
        np.testing.assert_allclose(scores, [1 + 9, 4 + 6, 9 + 1, 20 + 10])

    def test_furthest_and_nearest(self):
        cost = line_instance()
        self.assertEqual(choose_rendezvous(cost, FURTHEST), 5)
        # nodes 2 to 4 tie; the lowest node wins
        self.assertEqual(choose_rendezvous(cost, NEAREST), 2)

    def test_shortest_is_no_worse_than_the_other_strategies(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            cost = random_joint_instance(rng, max_robots=3, max_svps=6)
            totals = {s: decide(cost, s, self.config).plan.total_cost for s in (FURTHEST, NEAREST, SHORTEST)}
            self.assertLessEqual(totals[SHORTEST], min(totals[FURTHEST], totals[NEAREST]) + 1e-9)

    def test_unknown_strategy(self):
        with self.assertRaises(ValueError):
            choose_rendezvous(line_instance(), 'closest')

    def test_default_config_has_no_wall_clock_limits(self):
        config = get_config()
        self.assertEqual((config.gls_time_limit_ms, config.central_time_limit_s), (0.0, 0.0))
        rng = np.random.default_rng(21)
        for _ in range(3):
            cost = random_joint_instance(rng, max_robots=3, max_svps=9)
            first, second = decide(cost, SHORTEST), decide(cost, SHORTEST)
            self.assertFalse(first.fallback)
            self.assertEqual(first.plan.routes, second.plan.routes)
            self.assertEqual(first.plan.total_cost, second.plan.total_cost)

    def test_time_limit_falls_back_to_furthest(self):
        config = get_config(gls_time_limit_ms=0.0, central_time_limit_s=1e-9)
        decision = decide(line_instance(), SHORTEST, config)
        self.assertTrue(decision.fallback)
        self.assertEqual(decision.strategy, FURTHEST)
        self.assertEqual(decision.plan.rendezvous, 5)


class RendezvousTimeTests(SimpleTestCase):

    def test_without_previous_missions(self):
        self.assertEqual(rendezvous_time(30.0, 100.0, 20.0), 150.0)

    def test_late_previous_mission_dominates(self):
        arrivals = last_arrivals([((0.0, 0.0, 0.0), 140.0)], (3.0, 4.0, 0.0), lambda a, b: math.dist(a, b))
        self.assertEqual(arrivals, [145.0])
        self.assertEqual(rendezvous_time(30.0, 100.0, 20.0, arrivals), 165.0)


class InstanceFileTests(SimpleTestCase):

    def test_dump_and_load(self):
        cost = line_instance()
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'line.txt')
            dump_instance(cost, path)
            loaded = load_instance(path)
        np.testing.assert_array_equal(loaded.d, cost.d)
        np.testing.assert_array_equal(loaded.positions, cost.positions)
        self.assertEqual(loaded.n_robots, 2)

    def test_malformed_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'bad.txt')
            with open(path, 'w') as handle:
                handle.write('robots 1\nnodes 2\nnode 0 robot 0 0 0\nnode 1 svp 1 0 0\nmatrix\n0 1\n')
            with self.assertRaises(ScenarioError):
                load_instance(path)
