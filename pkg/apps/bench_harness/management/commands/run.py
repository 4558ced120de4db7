"""
Single Run Command
Runs one scenario under one coordination strategy and writes every log.
Run with: python manage.py run --scenario scenarios/building_2500.json --strategy ours --seed 3 --out runs/demo
"""

from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from apps.bench_harness.baselines import normalize_kind
from apps.bench_harness.models import BenchmarkRun
from apps.bench_harness.reporting import write_run
from apps.bench_harness.runner import run_scenario
from apps.core.exceptions import ScenarioError
from apps.world_sim.scenario import load_scenario


class Command(BaseCommand):
    help = 'Run one exploration scenario and write metrics, byte ledger, trajectories and traces'

    def add_arguments(self, parser):
        parser.add_argument('--scenario', required=True, help='Scenario JSON file')
        parser.add_argument('--strategy', default='ours', help='ours | no-coord | continuous')
        parser.add_argument('--seed', type=int, default=None, help='Overrides the scenario seed')
        parser.add_argument('--out', default=None, help='Output directory')
        parser.add_argument('--no-db', action='store_true', help='Do not persist the run')

    def handle(self, *args, **options):
        try:
            scenario = load_scenario(options['scenario'])
            kind = normalize_kind(options['strategy'])
        except (ScenarioError, ValueError) as exc:
            raise CommandError(str(exc))

        seed = scenario.seed if options['seed'] is None else options['seed']
        out_dir = Path(options['out'] or Path(scenario.config().output_root) / scenario.name / kind / f'seed_{seed}')
        self.stdout.write(self.style.NOTICE(f'Running {scenario.name} [{kind}] seed={seed}...'))

        result = run_scenario(scenario, kind, seed)
        write_run(result, out_dir, scenario.dt)
        if not options['no_db']:
            BenchmarkRun.from_metrics(result.metrics, out_dir)

        metrics = result.metrics
        summary = (
            f'time={metrics.exploration_time:.1f}s repeated={metrics.repeated_pct:.1f}% '
            f'independent={metrics.independent_pct:.1f}% bytes={metrics.total_bytes} -> {out_dir}'
        )
        if metrics.fault:
            self.stdout.write(self.style.ERROR(f'Run faulted: {metrics.fault}'))
        elif not metrics.complete:
            self.stdout.write(self.style.WARNING(f'Tick cap reached, run incomplete: {summary}'))
        else:
            self.stdout.write(self.style.SUCCESS(f'Completed: {summary}'))
