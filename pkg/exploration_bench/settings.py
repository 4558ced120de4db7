"""
Django settings for exploration_bench project.
Multi-robot exploration simulator, planners and benchmark harness.
Every tunable is read through python-decouple so runs can be reconfigured
from the environment or a .env file.
"""

import os
from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-exploration-bench-local-key')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = config('ALLOWED_HOSTS', default='localhost,127.0.0.1').split(',')

# Application definition
INSTALLED_APPS = [
    # Django Apps
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',

    # Third Party
    'rest_framework',

    # Local Apps
    'apps.core',
    'apps.world_sim',
    'apps.star_convex',
    'apps.frontier_sfi',
    'apps.env_library',
    'apps.mission_protocol',
    'apps.central_planner',
    'apps.local_planner',
    'apps.bench_harness',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'whitenoise.middleware.WhiteNoiseMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'exploration_bench.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'exploration_bench.wsgi.application'
ASGI_APPLICATION = 'exploration_bench.asgi.application'

# Database
# Benchmark runs are small records; SQLite is enough unless DB_ENGINE says otherwise.
if config('DB_ENGINE', default='sqlite') == 'postgresql':
    DATABASES = {
        'default': {
            'ENGINE': 'django.db.backends.postgresql',
            'NAME': config('DB_NAME', default='exploration_bench'),
            'USER': config('DB_USER', default='postgres'),
            'PASSWORD': config('DB_PASSWORD', default='postgres'),
            'HOST': config('DB_HOST', default='localhost'),
            'PORT': config('DB_PORT', default='5432'),
        }
    }
else:
    DATABASES = {
        'default': {
            'ENGINE': 'django.db.backends.sqlite3',
            'NAME': BASE_DIR / 'db.sqlite3',
        }
    }

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True

# Static files (admin only)
STATIC_URL = 'static/'
STATIC_ROOT = BASE_DIR / 'staticfiles'

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# REST Framework Configuration
REST_FRAMEWORK = {
    'DEFAULT_PERMISSION_CLASSES': (
        'rest_framework.permissions.AllowAny',
    ),
    'DEFAULT_PAGINATION_CLASS': 'rest_framework.pagination.PageNumberPagination',
    'PAGE_SIZE': 50,
    'EXCEPTION_HANDLER': 'apps.core.exceptions.custom_exception_handler',
}

# Exploration Configuration
# Sensor-relative quantities are factors of the robot's sensor range.
EXPLORATION = {
    # Star-convex free space
    'SAMPLER_AZIMUTH_STEP_DEG': config('EXPLORATION_SAMPLER_AZIMUTH_STEP_DEG', default=5.0, cast=float),
    'SAMPLER_HEIGHT_RINGS': config('EXPLORATION_SAMPLER_HEIGHT_RINGS', default=7, cast=int),
    'FLIP_RADIUS_FACTOR': config('EXPLORATION_FLIP_RADIUS_FACTOR', default=2.0, cast=float),
    'GEN_SPACING_FACTOR': config('EXPLORATION_GEN_SPACING_FACTOR', default=0.5, cast=float),

    # Frontier deletion and clustering
    'MESH_TABLE_CELL_DEG': config('EXPLORATION_MESH_TABLE_CELL_DEG', default=2.0, cast=float),
    'CLUSTER_W_TANGENTIAL': config('EXPLORATION_CLUSTER_W_TANGENTIAL', default=1.0, cast=float),
    'CLUSTER_W_NORMAL': config('EXPLORATION_CLUSTER_W_NORMAL', default=1.0, cast=float),
    'CLUSTER_W_NORMAL_DIFF': config('EXPLORATION_CLUSTER_W_NORMAL_DIFF', default=2.0, cast=float),
    'CLUSTER_SIGMA': config('EXPLORATION_CLUSTER_SIGMA', default=1.0, cast=float),
    'CLUSTER_KNN': config('EXPLORATION_CLUSTER_KNN', default=8, cast=int),
    'CLUSTER_EXTENT_FACTOR': config('EXPLORATION_CLUSTER_EXTENT_FACTOR', default=0.4, cast=float),
    'CLUSTER_MAX_EIGEN': config('EXPLORATION_CLUSTER_MAX_EIGEN', default=16, cast=int),
    'CLUSTER_BATCH_MAX': config('EXPLORATION_CLUSTER_BATCH_MAX', default=300, cast=int),

    # Viewpoints
    'R_OPT_FACTOR': config('EXPLORATION_R_OPT_FACTOR', default=0.6, cast=float),
    'VP_W_THETA': config('EXPLORATION_VP_W_THETA', default=1.0, cast=float),
    'VP_W_R': config('EXPLORATION_VP_W_R', default=0.5, cast=float),
    'SVP_RADIUS_FACTOR': config('EXPLORATION_SVP_RADIUS_FACTOR', default=0.3, cast=float),
    'VP_CLEARANCE': config('EXPLORATION_VP_CLEARANCE', default=0.5, cast=float),

    # Central planner. Wall-clock limits are opt-in: 0 disables them, the iteration
    # and stall limits always apply.
    'STRATEGY': config('EXPLORATION_STRATEGY', default='furthest'),
    'EXACT_CAP': config('EXPLORATION_EXACT_CAP', default=10, cast=int),
    'GLS_LAMBDA_FACTOR': config('EXPLORATION_GLS_LAMBDA_FACTOR', default=0.2, cast=float),
    'GLS_MAX_ITERATIONS': config('EXPLORATION_GLS_MAX_ITERATIONS', default=5000, cast=int),
    'GLS_TIME_LIMIT_MS': config('EXPLORATION_GLS_TIME_LIMIT_MS', default=0.0, cast=float),
    'GLS_STALL_ROUNDS': config('EXPLORATION_GLS_STALL_ROUNDS', default=60, cast=int),
    'CENTRAL_TIME_LIMIT_S': config('EXPLORATION_CENTRAL_TIME_LIMIT_S', default=0.0, cast=float),
    'EXTRA_TIME_S': config('EXPLORATION_EXTRA_TIME_S', default=20.0, cast=float),

    # Local planner
    'LOCAL_EXACT_CAP': config('EXPLORATION_LOCAL_EXACT_CAP', default=8, cast=int),
    'SLACK_MIN_FACTOR': config('EXPLORATION_SLACK_MIN_FACTOR', default=1.2, cast=float),
    'DEADLINE_RESERVE': config('EXPLORATION_DEADLINE_RESERVE', default=0.1, cast=float),

    # Bandwidth accounting: organized raw cloud of the physical sensor
    'RAW_CLOUD_AZIMUTH_STEP_DEG': config('EXPLORATION_RAW_CLOUD_AZIMUTH_STEP_DEG', default=0.2, cast=float),
    'RAW_CLOUD_RINGS': config('EXPLORATION_RAW_CLOUD_RINGS', default=16, cast=int),

    # Harness
    'TICK_CAP': config('EXPLORATION_TICK_CAP', default=20000, cast=int),
    'OUTPUT_ROOT': config('EXPLORATION_OUTPUT_ROOT', default=str(BASE_DIR / 'runs')),
    'NIGHTLY_SUITE': config('EXPLORATION_NIGHTLY_SUITE', default=str(BASE_DIR / 'scenarios' / 'suite.json')),
    'NIGHTLY_SEEDS': config('EXPLORATION_NIGHTLY_SEEDS', default=3, cast=int),
}

# Logging Configuration
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'file': {
            'level': 'INFO',
            'class': 'logging.FileHandler',
            'filename': BASE_DIR / 'logs' / 'exploration.log',
            'formatter': 'verbose',
        },
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': config('DJANGO_LOG_LEVEL', default='INFO'),
            'propagate': False,
        },
        'apps': {
            'handlers': ['console', 'file'],
            'level': config('EXPLORATION_LOG_LEVEL', default='INFO'),
            'propagate': False,
        },
    },
}

# Create logs directory if it doesn't exist
os.makedirs(BASE_DIR / 'logs', exist_ok=True)
