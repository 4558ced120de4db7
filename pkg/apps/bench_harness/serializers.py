"""
Serializers for benchmark runs
"""

from rest_framework import serializers
from .models import BenchmarkRun


class BenchmarkRunListSerializer(serializers.ModelSerializer):
    """Compact serializer for run lists."""

    class Meta:
        model = BenchmarkRun
        fields = [
            'id', 'scenario', 'strategy', 'seed', 'exploration_time', 'repeated_pct',
            'independent_pct', 'total_bytes', 'complete', 'created_at'
        ]


class BenchmarkRunSerializer(serializers.ModelSerializer):
    total_traj_length = serializers.FloatField(read_only=True)
    bandwidth_ratio = serializers.FloatField(read_only=True)

    class Meta:
        model = BenchmarkRun
        fields = [
            'id', 'scenario', 'strategy', 'seed', 'exploration_time', 'repeated_pct',
            'independent_pct', 'coverage_pct', 'total_bytes', 'raw_cloud_bytes', 'bandwidth_ratio',
            'frames', 'ticks', 'traj_length', 'total_traj_length', 'bytes_per_link', 'timings',
            'complete', 'fault', 'output_dir', 'created_at', 'updated_at'
        ]
        read_only_fields = fields


class RunFilterSerializer(serializers.Serializer):
    """Query parameters accepted by the run list."""

    scenario = serializers.CharField(required=False)
    strategy = serializers.ChoiceField(choices=[c[0] for c in BenchmarkRun.STRATEGY_CHOICES], required=False)
    seed = serializers.IntegerField(required=False, min_value=0)
    complete = serializers.BooleanField(required=False, allow_null=True, default=None)
