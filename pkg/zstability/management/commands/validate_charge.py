# zstability/management/commands/validate_charge.py

from zstability.charge import validate_tabulated
from zstability.management.base import ZStabilityCommand
from zstability.utils import load_table


class Command(ZStabilityCommand):
    help = 'Valida uma tabela de valores de carga em BG (aditividade, Weyl e caráter reconstruído).'

    def add_arguments(self, parser):
        parser.add_argument('table', help="Arquivo JSON da tabela.")

    def run(self, **options):
        table = load_table(options['table'])
        report = validate_tabulated(table)
        self.emit({
            'group': table.datum.name,
            'bound': table.bound,
            'passed': report.passed,
            'zero_violation': report.zero_violation,
            'additivity_violations': [[list(a), list(b)] for a, b in report.additivity_violations],
            'weyl_violations': [[list(a), list(b)] for a, b in report.weyl_violations],
            'character': list(report.character) if report.character is not None else None,
            'residual': report.residual,
            'exact': report.exact,
        })
