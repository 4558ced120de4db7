"""
Nightly Scheduler for Benchmark Regression
Runs the bench command over the configured suite at 2 AM daily.

Usage:
    python scheduler.py

For production, use cron instead:
    0 2 * * * cd /path/to/project && source venv/bin/activate && python manage.py bench >> logs/bench.log 2>&1
"""

import schedule
import time
import subprocess
import os
from datetime import datetime

from decouple import config

# Get the directory where this script is located
BASE_DIR = os.path.dirname(os.path.abspath(__file__))

SUITE = config('EXPLORATION_NIGHTLY_SUITE', default='scenarios/suite.json')
SEEDS = config('EXPLORATION_NIGHTLY_SEEDS', default=3, cast=int)
RUN_AT = config('EXPLORATION_NIGHTLY_AT', default='02:00')


def run_nightly_bench():
    """Run the Django management command for the regression suite."""
    print(f"[{datetime.now()}] Running nightly benchmark on {SUITE} with {SEEDS} seed(s)...")

    try:
        result = subprocess.run(
            ['python', 'manage.py', 'bench', '--suite', SUITE, '--seeds', str(SEEDS)],
            cwd=BASE_DIR,
            capture_output=True,
            text=True
        )

        if result.returncode == 0:
            print(f"[{datetime.now()}] Benchmark finished")
            print(result.stdout)
        else:
            print(f"[{datetime.now()}] Benchmark failed")
            print(result.stderr)

    except Exception as e:
        print(f"[{datetime.now()}] Exception: {str(e)}")


def main():
    print("=" * 50)
    print("Nightly Benchmark Scheduler")
    print("=" * 50)
    print(f"Started at: {datetime.now()}")
    print(f"Scheduled time: {RUN_AT} daily")
    print("-" * 50)

    schedule.every().day.at(RUN_AT).do(run_nightly_bench)

    print("Scheduler is running. Press Ctrl+C to stop.")
    print("-" * 50)

    # Keep the script running
    while True:
        schedule.run_pending()
        time.sleep(60)


if __name__ == "__main__":
    main()
