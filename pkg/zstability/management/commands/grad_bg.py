# zstability/management/commands/grad_bg.py

from zstability.algebra import RootDatumLite
from zstability.graded import charges_dimension_BG, grad_components_BG
from zstability.management.base import ZStabilityCommand


class Command(ZStabilityCommand):
    help = 'Enumera as componentes de Grad(BG) numa caixa e a dimensão de Charges(BG).'

    def add_arguments(self, parser):
        parser.add_argument('--group', required=True, help="gl:N, sl:N ou torus:R")
        parser.add_argument('--bound', type=int, default=None)

    def run(self, **options):
        datum = RootDatumLite.from_spec(options['group'])
        bound = options['bound'] or self.config['GRAD_BOUND']
        cap = self.config['WEYL_CAP']
        components = grad_components_BG(datum, bound, cap=cap)
        self.emit({
            'group': datum.name,
            'bound': bound,
            'weyl_order': len(datum.weyl_group(cap)),
            'count': len(components),
            'components': [
                {
                    'representative': list(c.representative),
                    'orbit_size': c.orbit_size,
                    'levi_blocks': [list(block) for block in c.levi_blocks],
                }
                for c in components
            ],
            'charges_dimension': charges_dimension_BG(datum, 'equations'),
            'charges_dimension_reynolds': charges_dimension_BG(datum, 'reynolds', cap=cap),
        })
