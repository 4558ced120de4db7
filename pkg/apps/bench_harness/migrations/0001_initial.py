# Generated by Django 4.2.7 on 2026-10-17 09:12

import uuid
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='BenchmarkRun',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('scenario', models.CharField(max_length=200)),
                ('strategy', models.CharField(choices=[('ours', 'Mission protocol'), ('no_coord', 'No coordination'), ('continuous', 'Continuous connection')], max_length=20)),
                ('seed', models.IntegerField(default=0)),
                ('exploration_time', models.FloatField()),
                ('repeated_pct', models.FloatField()),
                ('independent_pct', models.FloatField()),
                ('coverage_pct', models.FloatField(default=0.0)),
                ('total_bytes', models.BigIntegerField(default=0)),
                ('raw_cloud_bytes', models.BigIntegerField(default=0)),
                ('frames', models.IntegerField(default=0)),
                ('ticks', models.IntegerField(default=0)),
                ('traj_length', models.JSONField(default=dict)),
                ('bytes_per_link', models.JSONField(default=dict)),
                ('timings', models.JSONField(blank=True, default=dict)),
                ('complete', models.BooleanField(default=False)),
                ('fault', models.TextField(blank=True, default='')),
                ('output_dir', models.CharField(blank=True, default='', max_length=500)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
            options={
                'verbose_name': 'Benchmark Run',
                'verbose_name_plural': 'Benchmark Runs',
                'db_table': 'benchmark_runs',
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['scenario', 'strategy'], name='benchmark_r_scenari_5d0c1e_idx'), models.Index(fields=['seed'], name='benchmark_r_seed_a41f07_idx'), models.Index(fields=['complete'], name='benchmark_r_complet_8e2b93_idx')],
            },
        ),
    ]
