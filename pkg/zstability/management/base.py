# zstability/management/base.py

import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from zstability.exceptions import ZStabilityError
from zstability.utils import dumps, load_scenario

logger = logging.getLogger(__name__)


class ZStabilityCommand(BaseCommand):
    """
    Base dos comandos: sem banco de dados nem verificações de migração, JSON no
    stdout e erros do domínio convertidos em CommandError com o código de saída.
    """
    requires_system_checks = []
    requires_migrations_checks = False

    @property
    def config(self):
        return settings.ZSTABILITY

    def handle(self, *args, **options):
        try:
            return self.run(**options)
        except ZStabilityError as exc:
            logger.debug(f"{type(exc).__name__}: {exc}")
            raise CommandError(str(exc), returncode=exc.exit_code)

    def run(self, **options):
        raise NotImplementedError

    def emit(self, payload):
        self.stdout.write(dumps(payload))


class SceneCommand(ZStabilityCommand):
    """Comandos que leem um cenário e escolhem uma carga pelo nome."""

    def add_arguments(self, parser):
        parser.add_argument('scenario', help="Arquivo JSON do cenário.")
        parser.add_argument('--charge', required=True, help="Nome da carga central declarada no cenário.")

    def load(self, options):
        scenario = load_scenario(options['scenario'])
        return scenario.scene, scenario.charge(options['charge'])
