# zstability/management/commands/flow.py

from zstability.constants import FLOW_DT_MAX
from zstability.management.base import SceneCommand
from zstability.moment import z_flow
from zstability.utils import parse_sigma, write_trace_csv


class Command(SceneCommand):
    help = 'Integra o Z-fluxo e escreve o traço em CSV (t, sigma_1..sigma_r, residual_norm, energy).'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--t-end', type=float, required=True)
        parser.add_argument('--dt-max', type=float, default=FLOW_DT_MAX)
        parser.add_argument('--tol', type=float, default=None)
        parser.add_argument('--sigma0', default=None)
        parser.add_argument('--output', default=None, help="Arquivo CSV de saída (padrão: stdout).")

    def run(self, **options):
        scene, charge = self.load(options)
        sigma0 = parse_sigma(options['sigma0'], scene.rank) if options['sigma0'] else None
        trace = z_flow(
            scene, charge, sigma0, t_end=options['t_end'],
            tol=options['tol'] or self.config['SOLVER_TOL'], dt_max=options['dt_max'],
        )
        if options['output']:
            with open(options['output'], 'w', newline='', encoding='utf-8') as stream:
                write_trace_csv(stream, trace, scene.rank)
        else:
            write_trace_csv(self.stdout, trace, scene.rank)
        self.stderr.write(f"{trace.status.value}: {trace.message}")
