# zstability/apps.py
from django.apps import AppConfig


class ZStabilityConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'zstability'
    verbose_name = 'Z-estabilidade'
