"""
Meeting Strategy Comparison Command
Random rendezvous instances solved under every meeting strategy; reports the
summed route cost J and the solve time per strategy.
Run with: python manage.py strategies --instances 20 --robots 3 --out strategies.csv
"""

import csv
import time

import numpy as np
from django.core.management.base import BaseCommand

from apps.central_planner.cost import euclidean_cost_matrix
from apps.central_planner.strategies import STRATEGIES, decide
from apps.core.conf import get_config


class Command(BaseCommand):
    help = 'Compare Furthest, Nearest and Shortest meeting strategies on random instances'

    def add_arguments(self, parser):
        parser.add_argument('--instances', type=int, default=20)
        parser.add_argument('--robots', type=int, default=3)
        parser.add_argument('--min-svps', type=int, default=5)
        parser.add_argument('--max-svps', type=int, default=25)
        parser.add_argument('--extent', type=float, default=50.0, help='Side of the square the points fall in')
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--out', default='strategies.csv')

    def handle(self, *args, **options):
        rng = np.random.default_rng(options['seed'])
        config = get_config(gls_time_limit_ms=0.0, central_time_limit_s=0.0)
        rows = []
        for index in range(options['instances']):
            m = int(rng.integers(options['min_svps'], options['max_svps'] + 1))
            cost = euclidean_cost_matrix(
                rng.uniform(0, options['extent'], size=(options['robots'], 3)) * [1, 1, 0],
                rng.uniform(0, options['extent'], size=(m, 3)) * [1, 1, 0],
            )
            for strategy in STRATEGIES:
                started = time.perf_counter()
                decision = decide(cost, strategy, config)
                elapsed = time.perf_counter() - started
                rows.append((index, m, strategy, decision.plan.total_cost, decision.plan.t_b, elapsed))

        with open(options['out'], 'w', newline='') as handle:
            writer = csv.writer(handle)
            writer.writerow(['instance', 'svps', 'strategy', 'J', 't_b', 'solve_s'])
            for index, m, strategy, j, t_b, elapsed in rows:
                writer.writerow([index, m, strategy, f'{j:.6f}', f'{t_b:.6f}', f'{elapsed:.6f}'])

        for strategy in STRATEGIES:
            costs = [row[3] for row in rows if row[2] == strategy]
            times = [row[5] for row in rows if row[2] == strategy]
            self.stdout.write(self.style.SUCCESS(
                f'{strategy:>9}: mean J={np.mean(costs):.2f}s  mean solve={1000 * np.mean(times):.1f}ms'
            ))
        self.stdout.write(self.style.NOTICE(f'Per-instance results written to {options["out"]}'))
