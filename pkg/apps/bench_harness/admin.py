from django.contrib import admin
from .models import BenchmarkRun


@admin.register(BenchmarkRun)
class BenchmarkRunAdmin(admin.ModelAdmin):
    list_display = ('scenario', 'strategy', 'seed', 'exploration_time', 'repeated_pct', 'complete', 'created_at')
    list_filter = ('strategy', 'complete', 'scenario', 'created_at')
    search_fields = ('scenario', 'fault')
    ordering = ('-created_at',)
