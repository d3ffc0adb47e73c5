from django.apps import AppConfig


class QnetConfig(AppConfig):
    name = 'qnet'
    verbose_name = 'Quantum network image compression'
