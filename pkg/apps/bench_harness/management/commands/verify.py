"""
Oracle Verification Command
Checks the fast geometry, deletion and solver paths against brute force.
Run with: python manage.py verify [--fixtures DIR] [--quick]
"""

import math
import time
from pathlib import Path

import numpy as np
from django.core.management.base import BaseCommand, CommandError

from apps.bench_harness import oracles
from apps.central_planner.exact import check_decision, solve_exact
from apps.central_planner.instance_io import load_instance
from apps.core.conf import get_config
from apps.core.exceptions import ScenarioError


class Command(BaseCommand):
    help = 'Run the oracle suites (geometry, frontier soundness, exact solvers) and fail on any mismatch'

    def add_arguments(self, parser):
        parser.add_argument('--fixtures', default=None, help='Directory of routing instance files (*.txt)')
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--quick', action='store_true', help='Smaller case counts')

    def handle(self, *args, **options):
        rng = np.random.default_rng(options['seed'])
        config = get_config()
        scale = 0.2 if options['quick'] else 1.0

        def count(n):
            return max(1, int(n * scale))

        checks = [
            ('flip involution', lambda: oracles.flip_violations(rng, trials=count(1000))),
            ('star-shaped containment', lambda: self._star(rng, config, count(50))),
            ('mesh table vs brute force', lambda: self._mesh_table(rng, config, count(20))),
            ('frontier soundness after merges', lambda: sum(
                oracles.merge_soundness_violations(rng, config=config) for _ in range(count(5))
            )),
            ('joint routing vs enumeration', lambda: oracles.joint_mismatches(rng, count(100), config)),
            ('local routing vs enumeration', lambda: oracles.local_mismatches(rng, count(100))),
        ]
        if options['fixtures']:
            checks.append(('instance fixtures', lambda: self._fixtures(Path(options['fixtures']), config)))

        failed = []
        for name, check in checks:
            started = time.perf_counter()
            violations = check()
            elapsed = time.perf_counter() - started
            if violations:
                failed.append(name)
                self.stdout.write(self.style.ERROR(f'FAIL {name}: {violations} violation(s) [{elapsed:.1f}s]'))
            else:
                self.stdout.write(self.style.SUCCESS(f'ok   {name} [{elapsed:.1f}s]'))

        if failed:
            raise CommandError(f'{len(failed)} oracle suite(s) failed: {", ".join(failed)}')
        self.stdout.write(self.style.SUCCESS('All oracle suites passed.'))

    def _star(self, rng, config, polytopes):
        return sum(oracles.star_violations(p, rng) for p in oracles.random_polytopes(polytopes, rng, config))

    def _mesh_table(self, rng, config, fixtures):
        total = 0
        for polytope in oracles.random_polytopes(fixtures, rng, config):
            total += oracles.mesh_table_mismatches(polytope, oracles.scatter_points(polytope, rng),
                                                   config.mesh_table_cell_deg)
        return total

    def _fixtures(self, directory, config):
        files = sorted(directory.glob('*.txt'))
        if not files:
            raise CommandError(f'No instance files in {directory}.')
        mismatches = 0
        for path in files:
            try:
                cost = load_instance(path)
            except ScenarioError as exc:
                raise CommandError(str(exc))
            decision, _ = solve_exact(cost, config=config.with_overrides(exact_cap=max(cost.n_svps, 1)))
            expected = oracles.enumerate_joint(cost)
            if check_decision(cost, decision) or not math.isclose(decision.objective, expected,
                                                                  rel_tol=1e-9, abs_tol=1e-9):
                self.stdout.write(self.style.WARNING(f'{path.name}: {decision.objective} != {expected}'))
                mismatches += 1
        return mismatches
