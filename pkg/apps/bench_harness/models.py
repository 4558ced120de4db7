"""
Benchmark Models - persisted run metrics
"""

from django.db import models
import uuid


class BenchmarkRun(models.Model):
    """
    One seeded run of a scenario under a coordination strategy.
    Wall-clock solver timings are kept apart from the deterministic metrics.
    """

    STRATEGY_CHOICES = (
        ('ours', 'Mission protocol'),
        ('no_coord', 'No coordination'),
        ('continuous', 'Continuous connection'),
    )

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)

    # Run identity
    scenario = models.CharField(max_length=200)
    strategy = models.CharField(max_length=20, choices=STRATEGY_CHOICES)
    seed = models.IntegerField(default=0)

    # Metrics
    exploration_time = models.FloatField()
    repeated_pct = models.FloatField()
    independent_pct = models.FloatField()
    coverage_pct = models.FloatField(default=0.0)
    total_bytes = models.BigIntegerField(default=0)
    raw_cloud_bytes = models.BigIntegerField(default=0)
    frames = models.IntegerField(default=0)
    ticks = models.IntegerField(default=0)
    traj_length = models.JSONField(default=dict)
    bytes_per_link = models.JSONField(default=dict)
    timings = models.JSONField(default=dict, blank=True)

    # Outcome
    complete = models.BooleanField(default=False)
    fault = models.TextField(blank=True, default='')
    output_dir = models.CharField(max_length=500, blank=True, default='')

    # Timestamps
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        db_table = 'benchmark_runs'
        verbose_name = 'Benchmark Run'
        verbose_name_plural = 'Benchmark Runs'
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['scenario', 'strategy']),
            models.Index(fields=['seed']),
            models.Index(fields=['complete']),
        ]

    def __str__(self):
        return f"{self.scenario} [{self.strategy}] seed={self.seed}"

    @property
    def total_traj_length(self):
        return sum(self.traj_length.values())

    @property
    def bandwidth_ratio(self):
        return self.total_bytes / self.raw_cloud_bytes if self.raw_cloud_bytes else 0.0

    @classmethod
    def from_metrics(cls, metrics, output_dir=''):
        return cls.objects.create(
            scenario=metrics.scenario,
            strategy=metrics.strategy,
            seed=metrics.seed,
            exploration_time=metrics.exploration_time,
            repeated_pct=metrics.repeated_pct,
            independent_pct=metrics.independent_pct,
            coverage_pct=metrics.coverage_pct,
            total_bytes=metrics.total_bytes,
            raw_cloud_bytes=metrics.raw_cloud_bytes,
            frames=metrics.frames,
            ticks=metrics.ticks,
            traj_length=metrics.traj_length,
            bytes_per_link=metrics.bytes_per_link,
            timings=metrics.timings,
            complete=metrics.complete,
            fault=metrics.fault,
            output_dir=str(output_dir),
        )
