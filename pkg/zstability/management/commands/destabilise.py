# zstability/management/commands/destabilise.py

from zstability.management.base import SceneCommand
from zstability.stability import optimal_destabiliser


class Command(SceneCommand):
    help = 'Calcula o subgrupo desestabilizante ótimo de um ponto Z-instável.'

    def run(self, **options):
        scene, charge = self.load(options)
        self.emit(optimal_destabiliser(scene, charge).to_dict())
