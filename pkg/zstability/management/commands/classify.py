# zstability/management/commands/classify.py

from django.core.management.base import CommandError

from zstability.constants import CLI_UNSTABLE, EXIT_UNSTABLE
from zstability.management.base import SceneCommand
from zstability.stability import VerdictClass, brute_force_classify, classify


class Command(SceneCommand):
    help = 'Classifica o ponto do cenário (Stable, Polystable, StrictlySemistable ou Unstable).'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--oracle-bound', type=int, default=None,
                            help="Também roda o oráculo de força bruta com este raio.")
        parser.add_argument('--allow-mixed', action='store_true',
                            help="Aceita coeficientes r_k de sinais mistos (classificação só pelo oráculo).")
        parser.add_argument('--strict', action='store_true', help="Sai com código 1 em veredito Unstable.")

    def run(self, **options):
        scene, charge = self.load(options)
        bound = options['oracle_bound'] or self.config['ORACLE_BOUND'] or None
        verdict = classify(scene, charge, allow_mixed=options['allow_mixed'], oracle_bound=bound)
        payload = verdict.to_dict()
        if options['oracle_bound']:
            oracle = brute_force_classify(scene, charge, options['oracle_bound'])
            payload['oracle'] = oracle.to_dict()
            payload['agree'] = oracle.cls == verdict.cls
        self.emit(payload)
        if options['strict'] and verdict.cls == VerdictClass.UNSTABLE:
            raise CommandError(CLI_UNSTABLE, returncode=EXIT_UNSTABLE)
