"""
Benchmark Suite Command
Runs every (scenario, strategy, seed) of a suite file and writes per-run logs,
a metrics table and plot-ready aggregates.
Run with: python manage.py bench --suite scenarios/suite.json --seeds 20

Suite file:
    {"scenarios": ["building_2500.json", ...], "strategies": ["ours", "no_coord", "continuous"]}
Scenario paths are relative to the suite file.
"""

import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from apps.bench_harness.baselines import KINDS, normalize_kind
from apps.bench_harness.models import BenchmarkRun
from apps.bench_harness.reporting import aggregate, write_aggregates_csv, write_metrics_csv, write_run
from apps.bench_harness.runner import run_scenario
from apps.core.conf import get_config
from apps.core.exceptions import ScenarioError
from apps.world_sim.scenario import load_scenario


def run_job(job):
    """One isolated run; module level so worker processes can pickle it."""
    scenario_path, kind, seed, out_dir = job
    scenario = load_scenario(scenario_path)
    result = run_scenario(scenario, kind, seed)
    write_run(result, out_dir, scenario.dt)
    return result.metrics, out_dir


def load_suite(path):
    path = Path(path)
    try:
        suite = json.loads(path.read_text())
    except (OSError, ValueError) as exc:
        raise ScenarioError(f'Cannot read suite {path}: {exc}')
    scenarios = [str(path.parent / name) for name in suite.get('scenarios', [])]
    if not scenarios:
        raise ScenarioError(f'Suite {path} lists no scenarios.')
    strategies = [normalize_kind(kind) for kind in suite.get('strategies', KINDS)]
    return scenarios, strategies


class Command(BaseCommand):
    help = 'Run a benchmark suite over several seeds and write metrics and aggregates'

    def add_arguments(self, parser):
        parser.add_argument('--suite', default=None, help='Suite JSON file')
        parser.add_argument('--seeds', type=int, default=None, help='Seeds 0..K-1 per scenario')
        parser.add_argument('--out', default=None, help='Output directory')
        parser.add_argument('--workers', type=int, default=1, help='Parallel runs')
        parser.add_argument('--no-db', action='store_true', help='Do not persist runs')

    def handle(self, *args, **options):
        config = get_config()
        suite_path = options['suite'] or config.nightly_suite
        seeds = options['seeds'] or config.nightly_seeds
        try:
            scenarios, strategies = load_suite(suite_path)
            names = {path: load_scenario(path).name for path in scenarios}
        except (ScenarioError, ValueError) as exc:
            raise CommandError(str(exc))

        out_root = Path(options['out'] or Path(config.output_root) / Path(suite_path).stem)
        jobs = [
            (path, kind, seed, out_root / names[path] / kind / f'seed_{seed}')
            for path in scenarios for kind in strategies for seed in range(seeds)
        ]
        self.stdout.write(self.style.NOTICE(f'Running {len(jobs)} runs with {options["workers"]} worker(s)...'))

        if options['workers'] > 1:
            with ProcessPoolExecutor(max_workers=options['workers']) as pool:
                outcomes = list(pool.map(run_job, jobs))
        else:
            outcomes = [run_job(job) for job in jobs]

        all_metrics = []
        for metrics, out_dir in outcomes:
            all_metrics.append(metrics)
            if not options['no_db']:
                BenchmarkRun.from_metrics(metrics, out_dir)
            style = self.style.SUCCESS if metrics.complete else self.style.WARNING
            self.stdout.write(style(
                f'{metrics.scenario} [{metrics.strategy}] seed={metrics.seed}: '
                f'time={metrics.exploration_time:.1f}s repeated={metrics.repeated_pct:.1f}%'
                + (f' fault: {metrics.fault}' if metrics.fault else '')
            ))

        out_root.mkdir(parents=True, exist_ok=True)
        write_metrics_csv(out_root / 'metrics.csv', all_metrics)
        write_aggregates_csv(out_root / 'aggregates.csv', aggregate(all_metrics))
        faulted = sum(1 for m in all_metrics if m.fault)
        incomplete = sum(1 for m in all_metrics if not m.complete)
        self.stdout.write(self.style.SUCCESS(
            f'Suite done: {len(all_metrics)} runs, {incomplete} incomplete, {faulted} faulted -> {out_root}'
        ))
