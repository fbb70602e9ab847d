# zstability/management/commands/solve.py

from django.core.management.base import CommandError

from zstability.constants import CLI_NOT_CONVERGED, EXIT_NUMERIC
from zstability.management.base import SceneCommand
from zstability.moment import solve_critical
from zstability.utils import parse_sigma, write_trace_csv


class Command(SceneCommand):
    help = 'Procura um ponto Z-crítico na órbita por Newton amortecido sobre a Z-energia.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--tol', type=float, default=None)
        parser.add_argument('--max-iter', type=int, default=None)
        parser.add_argument('--sigma0', default=None, help="Ponto inicial 'v1,...,vr'.")
        parser.add_argument('--trace', default=None, help="Grava o traço das iterações neste CSV.")
        parser.add_argument('--strict', action='store_true', help="Sai com código 5 se não convergir.")

    def run(self, **options):
        scene, charge = self.load(options)
        sigma0 = parse_sigma(options['sigma0'], scene.rank) if options['sigma0'] else None
        solution = solve_critical(
            scene, charge, sigma0,
            tol=options['tol'] or self.config['SOLVER_TOL'],
            max_iter=options['max_iter'] or self.config['MAX_ITER'],
        )
        if options['trace']:
            with open(options['trace'], 'w', newline='', encoding='utf-8') as stream:
                write_trace_csv(stream, solution.trace, scene.rank)
        self.emit(solution.to_dict())
        if options['strict'] and not solution.converged:
            raise CommandError(CLI_NOT_CONVERGED.format(status=solution.status.value), returncode=EXIT_NUMERIC)
