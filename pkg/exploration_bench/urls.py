"""
Main URL Configuration for exploration_bench project.
"""

from django.contrib import admin
from django.urls import path, include

urlpatterns = [
    # Admin
    path('admin/', admin.site.urls),

    # API Endpoints
    path('api/bench/', include('apps.bench_harness.urls')),
]
