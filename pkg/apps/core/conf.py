"""
Exploration Configuration
Typed, immutable view over settings.EXPLORATION.
"""

from dataclasses import dataclass, fields, replace

from django.conf import settings


@dataclass(frozen=True)
class ExplorationConfig:
    """
    Tunables shared by the sensing, SFI, planning and harness apps.
    Factors are multiplied by the robot's sensor range where they are used.
    """

    sampler_azimuth_step_deg: float = 5.0
    sampler_height_rings: int = 7
    flip_radius_factor: float = 2.0
    gen_spacing_factor: float = 0.5

    mesh_table_cell_deg: float = 2.0
    cluster_w_tangential: float = 1.0
    cluster_w_normal: float = 1.0
    cluster_w_normal_diff: float = 2.0
    cluster_sigma: float = 1.0
    cluster_knn: int = 8
    cluster_extent_factor: float = 0.4
    cluster_max_eigen: int = 16
    cluster_batch_max: int = 300

    r_opt_factor: float = 0.6
    vp_w_theta: float = 1.0
    vp_w_r: float = 0.5
    svp_radius_factor: float = 0.3
    vp_clearance: float = 0.5

    strategy: str = 'furthest'
    exact_cap: int = 10
    gls_lambda_factor: float = 0.2
    gls_max_iterations: int = 5000
    gls_time_limit_ms: float = 0.0
    gls_stall_rounds: int = 60
    central_time_limit_s: float = 0.0
    extra_time_s: float = 20.0

    local_exact_cap: int = 8
    slack_min_factor: float = 1.2
    deadline_reserve: float = 0.1

    raw_cloud_azimuth_step_deg: float = 0.2
    raw_cloud_rings: int = 16

    tick_cap: int = 20000
    output_root: str = 'runs'
    nightly_suite: str = 'scenarios/suite.json'
    nightly_seeds: int = 3

    # Sensor-relative quantities

    def flip_radius(self, sensor_range):
        return self.flip_radius_factor * sensor_range

    def gen_spacing(self, sensor_range):
        return self.gen_spacing_factor * sensor_range

    def r_opt(self, sensor_range):
        return self.r_opt_factor * sensor_range

    def svp_radius(self, sensor_range):
        return self.svp_radius_factor * sensor_range

    def cluster_extent_max(self, sensor_range):
        return self.cluster_extent_factor * sensor_range

    def with_overrides(self, **overrides):
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise KeyError(f'Unknown exploration settings: {sorted(unknown)}')
        return replace(self, **overrides)


def get_config(**overrides):
    """
    Build an ExplorationConfig from settings.EXPLORATION plus overrides.
    Falls back to the dataclass defaults when settings are not configured.
    """
    source = getattr(settings, 'EXPLORATION', {}) if settings.configured else {}
    known = {f.name for f in fields(ExplorationConfig)}
    values = {key.lower(): value for key, value in source.items() if key.lower() in known}
    config = ExplorationConfig(**values)
    if overrides:
        config = config.with_overrides(**overrides)
    return config
