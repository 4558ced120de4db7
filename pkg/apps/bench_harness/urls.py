"""
URLs for bench_harness app
"""

from django.urls import path, include
from rest_framework.routers import DefaultRouter
from .views import BenchmarkRunViewSet

router = DefaultRouter()
router.register(r'runs', BenchmarkRunViewSet, basename='benchmark-run')

urlpatterns = [
    path('', include(router.urls)),
]
