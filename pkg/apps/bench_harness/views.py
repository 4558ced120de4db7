"""
Views for persisted benchmark runs (read-only)
"""

from django.db.models import Avg, Count, Q
from rest_framework import viewsets, filters
from rest_framework.decorators import action
from rest_framework.exceptions import ValidationError
from rest_framework.response import Response

from .models import BenchmarkRun
from .serializers import BenchmarkRunListSerializer, BenchmarkRunSerializer, RunFilterSerializer


class BenchmarkRunViewSet(viewsets.ReadOnlyModelViewSet):
    """Run list with scenario/strategy/seed filters, run detail, and per-group summary."""

    filter_backends = [filters.OrderingFilter]
    ordering_fields = ['created_at', 'exploration_time', 'repeated_pct', 'seed']
    ordering = ['-created_at']
    pagination_class = None

    def get_queryset(self):
        queryset = BenchmarkRun.objects.all()
        params = RunFilterSerializer(data=self.request.query_params)
        if not params.is_valid():
            raise ValidationError(params.errors)
        data = params.validated_data
        if data.get('scenario'):
            queryset = queryset.filter(scenario=data['scenario'])
        if data.get('strategy'):
            queryset = queryset.filter(strategy=data['strategy'])
        if data.get('seed') is not None:
            queryset = queryset.filter(seed=data['seed'])
        if data.get('complete') is not None:
            queryset = queryset.filter(complete=data['complete'])
        return queryset

    def get_serializer_class(self):
        if self.action == 'list':
            return BenchmarkRunListSerializer
        return BenchmarkRunSerializer

    def list(self, request, *args, **kwargs):
        queryset = self.filter_queryset(self.get_queryset())
        serializer = self.get_serializer(queryset, many=True)
        return Response({
            'success': True,
            'count': queryset.count(),
            'data': serializer.data
        })

    def retrieve(self, request, *args, **kwargs):
        serializer = self.get_serializer(self.get_object())
        return Response({
            'success': True,
            'data': serializer.data
        })

    @action(detail=False, methods=['get'])
    def summary(self, request):
        """Mean metrics per (scenario, strategy)."""
        groups = (
            self.get_queryset()
            .values('scenario', 'strategy')
            .annotate(
                runs=Count('id'),
                complete_runs=Count('id', filter=Q(complete=True)),
                exploration_time_mean=Avg('exploration_time'),
                repeated_pct_mean=Avg('repeated_pct'),
                independent_pct_mean=Avg('independent_pct'),
                total_bytes_mean=Avg('total_bytes'),
            )
            .order_by('scenario', 'strategy')
        )
        data = list(groups)
        return Response({
            'success': True,
            'count': len(data),
            'data': data
        })
