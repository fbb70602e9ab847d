# zstability/management/commands/sweep.py

import sympy

from zstability.charge import CentralCharge
from zstability.harness import charge_sweep
from zstability.management.base import ZStabilityCommand
from zstability.utils import load_scenario


class Command(ZStabilityCommand):
    help = 'Varre o segmento entre duas cargas do cenário e reporta as paredes de veredito.'

    def add_arguments(self, parser):
        parser.add_argument('scenario')
        parser.add_argument('--from', dest='start', required=True, help="Carga inicial.")
        parser.add_argument('--to', dest='end', required=True, help="Carga final.")
        parser.add_argument('--steps', type=int, default=10)

    def run(self, **options):
        scenario = load_scenario(options['scenario'])
        start, end = scenario.charge(options['start']), scenario.charge(options['end'])
        if sympy.simplify(start.phase - end.phase) != 0:
            self.stderr.write(f"Fases diferentes; usando a fase de '{start.name}'.")
        direction = CentralCharge(
            tuple(sympy.expand(b - a) for a, b in zip(start.coefficients, end.coefficients)),
            start.phase, f"{end.name}-{start.name}",
        )
        report = charge_sweep(scenario.scene, start, direction, options['steps'])
        payload = report.to_dict()
        payload.update({'from': start.name, 'to': end.name, 'steps': options['steps']})
        self.emit(payload)
