from django.apps import AppConfig


class LinespecConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'linespec'
    verbose_name = 'Line spectrum estimation'
