# zstability/management/commands/energy.py

from zstability.management.base import SceneCommand
from zstability.moment import energy
from zstability.utils import parse_sigma


class Command(SceneCommand):
    help = 'Avalia a Z-energia, o gradiente e a Hessiana em sigma.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--sigma', required=True, help="Direção 'v1,...,vr'.")

    def run(self, **options):
        scene, charge = self.load(options)
        sigma = parse_sigma(options['sigma'], scene.rank)
        self.emit(energy(scene, charge, sigma).to_dict())
