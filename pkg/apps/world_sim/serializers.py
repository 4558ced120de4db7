"""
Scenario Serializers
Validate scenario files before any world or robot is built.
"""

from rest_framework import serializers


class Vector3Field(serializers.ListField):
    child = serializers.FloatField()

    def __init__(self, **kwargs):
        kwargs.setdefault('min_length', 3)
        kwargs.setdefault('max_length', 3)
        super().__init__(**kwargs)


class ObstacleBoxSerializer(serializers.Serializer):
    """Axis-aligned obstacle box in meters."""

    min = Vector3Field()
    max = Vector3Field()

    def validate(self, data):
        if any(hi <= lo for lo, hi in zip(data['min'], data['max'])):
            raise serializers.ValidationError('Box max must exceed min on every axis.')
        return data


class RandomObstaclesSerializer(serializers.Serializer):
    """Seeded full-height pillars scattered over the floor plan."""

    count = serializers.IntegerField(min_value=0, default=0)
    density = serializers.FloatField(min_value=0.0, max_value=0.5, required=False)
    min_size = serializers.FloatField(min_value=0.1, default=0.5)
    max_size = serializers.FloatField(min_value=0.1, default=2.0)
    clearance = serializers.FloatField(min_value=0.0, default=1.5)

    def validate(self, data):
        if data['max_size'] < data['min_size']:
            raise serializers.ValidationError('max_size must be at least min_size.')
        return data


class RoomsSerializer(serializers.Serializer):
    """Building layout: interior walls on a grid, one seeded doorway per wall segment."""

    spacing = serializers.FloatField(min_value=2.0)
    wall_thickness = serializers.FloatField(min_value=0.1, default=0.5)
    door_width = serializers.FloatField(min_value=0.5, default=2.0)


class WorldSerializer(serializers.Serializer):
    size = Vector3Field()
    resolution = serializers.FloatField(min_value=0.01)
    origin = Vector3Field(required=False, default=[0.0, 0.0, 0.0])
    boxes = ObstacleBoxSerializer(many=True, required=False, default=list)
    random = RandomObstaclesSerializer(required=False)
    rooms = RoomsSerializer(required=False)

    def validate_size(self, value):
        if any(v <= 0 for v in value):
            raise serializers.ValidationError('World size must be positive on every axis.')
        return value


class RobotSpecSerializer(serializers.Serializer):
    id = serializers.IntegerField(min_value=0, required=False)
    start = Vector3Field()
    yaw = serializers.FloatField(default=0.0)
    v_max = serializers.FloatField(min_value=1e-6, default=1.0)
    sensor_range = serializers.FloatField(min_value=1e-6, default=10.0)
    fov_h_deg = serializers.FloatField(min_value=1.0, max_value=360.0, default=360.0)
    fov_v_deg = serializers.FloatField(min_value=1.0, max_value=180.0, default=180.0)
    comm_range = serializers.FloatField(min_value=1e-6, default=3.0)


class SolverLimitsSerializer(serializers.Serializer):
    """Per-scenario overrides of the planner settings."""

    strategy = serializers.ChoiceField(choices=['furthest', 'nearest', 'shortest'], required=False)
    exact_cap = serializers.IntegerField(min_value=1, required=False)
    gls_max_iterations = serializers.IntegerField(min_value=0, required=False)
    gls_time_limit_ms = serializers.FloatField(min_value=0.0, required=False, allow_null=True)
    gls_stall_rounds = serializers.IntegerField(min_value=1, required=False)
    central_time_limit_s = serializers.FloatField(min_value=0.0, required=False)
    local_exact_cap = serializers.IntegerField(min_value=0, required=False)
    sampler_azimuth_step_deg = serializers.FloatField(min_value=0.5, required=False)
    sampler_height_rings = serializers.IntegerField(min_value=2, required=False)


class ScenarioSerializer(serializers.Serializer):
    name = serializers.CharField(max_length=120)
    world = WorldSerializer()
    robots = RobotSpecSerializer(many=True)
    dt = serializers.FloatField(min_value=1e-6, default=0.5)
    seed = serializers.IntegerField(default=0)
    extra_time = serializers.FloatField(min_value=0.0, default=20.0)
    tick_cap = serializers.IntegerField(min_value=1, required=False)
    solver = SolverLimitsSerializer(required=False, default=dict)

    def validate_robots(self, value):
        if not value:
            raise serializers.ValidationError('At least one robot is required.')
        ids = [spec.get('id', index) for index, spec in enumerate(value)]
        if len(set(ids)) != len(ids):
            raise serializers.ValidationError('Robot ids must be unique.')
        return value

    def validate(self, data):
        lower = data['world']['origin']
        upper = [o + s for o, s in zip(lower, data['world']['size'])]
        for spec in data['robots']:
            if any(not lo <= p < hi for p, lo, hi in zip(spec['start'], lower, upper)):
                raise serializers.ValidationError(f"Robot start {spec['start']} lies outside the world.")
        return data
