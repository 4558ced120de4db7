"""
Bandwidth Sweep Command
Obstacle density x sensor range grid: library bytes (polytopes + SFI) against
organised raw point-cloud bytes for the same frames.
Run with: python manage.py bandwidth --densities 0.02,0.05,0.1 --ranges 6,10,14 --out bandwidth.csv
"""

import csv

import numpy as np
from django.core.management.base import BaseCommand, CommandError

from apps.core.conf import get_config
from apps.core.exceptions import DegenerateHullError, EmptyFrameError, ScenarioError
from apps.env_library.codec import serialize
from apps.env_library.library import EnvironmentLibrary
from apps.star_convex.polytope import build_polytope
from apps.star_convex.sampling import sample_frame
from apps.world_sim.robots import RobotState
from apps.world_sim.scenario import build_world, load_scenario


def _floats(text):
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise CommandError(f'Expected a comma separated list of numbers, got {text!r}.')


def raw_frame_bytes(config):
    """One organised cloud frame: azimuth columns x rings x three float32 coordinates."""
    return int(round(360.0 / config.raw_cloud_azimuth_step_deg)) * config.raw_cloud_rings * 12


def sweep_cell(density, sensor_range, frames, size, seed, config):
    scenario = load_scenario({
        'name': f'bandwidth_{density}_{sensor_range}',
        'seed': seed,
        'world': {
            'size': [size, size, 3.0],
            'resolution': 0.5,
            'random': {'density': density, 'min_size': 0.5, 'max_size': 2.0, 'clearance': 1.5},
        },
        'robots': [{'start': [size / 2, size / 2, 1.25], 'sensor_range': sensor_range, 'fov_v_deg': 23.1}],
    })
    world = build_world(scenario)
    rng = np.random.default_rng(seed)
    library = EnvironmentLibrary(0, sensor_range, config, seed)
    free = np.argwhere(~world.occupancy[:, :, 2])
    position = np.array(scenario.robots[0]['start'], dtype=float)
    taken = 0
    for _ in range(frames * 3):
        if taken >= frames:
            break
        robot = RobotState(id=0, position=position, sensor_range=sensor_range, fov_v=np.radians(23.1))
        try:
            samples = sample_frame(world, robot, config)
            library.observe(build_polytope(samples, position, config.flip_radius(sensor_range),
                                           library.next_polytope_id()))
            taken += 1
        except (EmptyFrameError, DegenerateHullError):
            pass
        centers = world.origin[:2] + (free[:, :2] + 0.5) * world.resolution
        near = free[np.linalg.norm(centers - position[:2], axis=1) <= 2 * config.gen_spacing(sensor_range)]
        pool = near if len(near) else free
        cell = pool[rng.integers(len(pool))]
        position = world.cell_center((int(cell[0]), int(cell[1]), 2))
    return taken, len(serialize(library)), raw_frame_bytes(config) * taken


class Command(BaseCommand):
    help = (
        'Sweep obstacle density and sensor range, comparing library bytes with raw point-cloud bytes. '
        'The raw reference is an organised float32 xyz cloud per frame, by default 1800 azimuth columns '
        'x 16 rings x 12 B = 345600 B (EXPLORATION_RAW_CLOUD_AZIMUTH_STEP_DEG, EXPLORATION_RAW_CLOUD_RINGS), '
        'independent of the rays sampled for the polytopes.'
    )

    def add_arguments(self, parser):
        parser.add_argument('--densities', default='0.02,0.05,0.1')
        parser.add_argument('--ranges', default='6,10,14')
        parser.add_argument('--frames', type=int, default=10)
        parser.add_argument('--size', type=float, default=50.0)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--out', default='bandwidth.csv')

    def handle(self, *args, **options):
        config = get_config()
        self.stdout.write(f'Raw reference: {raw_frame_bytes(config)}B per frame')
        rows = []
        for density in _floats(options['densities']):
            for sensor_range in _floats(options['ranges']):
                try:
                    taken, library_bytes, raw_bytes = sweep_cell(
                        density, sensor_range, options['frames'], options['size'], options['seed'], config
                    )
                except ScenarioError as exc:
                    raise CommandError(str(exc))
                ratio = library_bytes / raw_bytes if raw_bytes else 0.0
                rows.append((density, sensor_range, taken, library_bytes, raw_bytes, ratio))
                self.stdout.write(
                    f'density={density:<5} range={sensor_range:<5} frames={taken:<3} '
                    f'library={library_bytes}B raw={raw_bytes}B ratio={ratio:.4f}'
                )

        with open(options['out'], 'w', newline='') as handle:
            writer = csv.writer(handle)
            writer.writerow(['density', 'sensor_range', 'frames', 'library_bytes', 'raw_bytes', 'ratio'])
            for row in rows:
                writer.writerow([*row[:5], f'{row[5]:.6f}'])
        self.stdout.write(self.style.SUCCESS(f'Bandwidth sweep written to {options["out"]}'))
