# zstability/management/commands/verify_kn.py

from django.core.management.base import CommandError

from zstability.constants import EXIT_DISAGREEMENT, HARNESS_DISAGREEMENT
from zstability.harness import InstanceSpec, kempf_ness_verify
from zstability.management.base import ZStabilityCommand


class Command(ZStabilityCommand):
    help = 'Verifica o teorema de Kempf-Ness em instâncias aleatórias reproduzíveis.'

    def add_arguments(self, parser):
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--count', type=int, default=200)
        parser.add_argument('--threads', type=int, default=None)
        parser.add_argument('--tol', type=float, default=None)
        parser.add_argument('--rank-max', type=int, default=3)
        parser.add_argument('--factors-max', type=int, default=3)
        parser.add_argument('--coords-max', type=int, default=5)
        parser.add_argument('--weight-bound', type=int, default=3)
        parser.add_argument('--no-shrink', action='store_true', help="Não minimiza as discordâncias.")

    def run(self, **options):
        spec = InstanceSpec(
            rank_range=(1, options['rank_max']),
            factor_count_range=(1, options['factors_max']),
            coords_range=(2, options['coords_max']),
            weight_bound=options['weight_bound'],
            seed=options['seed'],
            count=options['count'],
        )
        report = kempf_ness_verify(
            spec,
            tol=options['tol'] or self.config['SOLVER_TOL'],
            threads=options['threads'] or self.config['THREADS'],
            shrink=not options['no_shrink'],
        )
        self.emit(report.to_dict())
        if not report.ok:
            count = report.summary['disagreements']
            raise CommandError(HARNESS_DISAGREEMENT.format(count=count), returncode=EXIT_DISAGREEMENT)
