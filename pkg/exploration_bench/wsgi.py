"""
WSGI config for exploration_bench project.
"""

import os
from django.core.wsgi import get_wsgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'exploration_bench.settings')

application = get_wsgi_application()
