# zstability/graded.py
"""
Pontos graduados, especialização sob subgrupos a um parâmetro e a combinatória
de Grad(BG) / Charges(BG) para grupos dados por um RootDatumLite.
"""

import itertools
import logging
from dataclasses import dataclass

import numpy as np
import sympy

from .algebra import Cocharacter, in_stabiliser, pairing, rational_rank
from .constants import DEFAULT_WEYL_CAP, GRADED_BAD_BOUND, GRADED_INVALID
from .exceptions import InvalidGradedPoint, PreconditionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradedPoint:
    """Um ponto da cena junto com um cocaractere do seu estabilizador."""
    scene: object
    lam: Cocharacter

    def __post_init__(self):
        object.__setattr__(self, 'lam', Cocharacter(tuple(self.lam)))

    def is_valid(self):
        return fixes_point(self.scene, self.lam)

    def validate(self):
        for k, factor in enumerate(self.scene.factors):
            values = {pairing(row, self.lam) for row in self.scene.supported_weights(k)}
            if len(values) > 1:
                raise InvalidGradedPoint(GRADED_INVALID.format(lam=self.lam, label=factor.label or k))
        return self


@dataclass(frozen=True)
class SpecialisationResult:
    limit: object
    levels: tuple
    supports: tuple


@dataclass(frozen=True)
class GradComponent:
    representative: Cocharacter
    orbit_size: int
    levi_blocks: tuple


def fixes_point(scene, lam):
    return in_stabiliser(scene, tuple(lam))


def specialise(scene, lam):
    """
    Limite de lam(t).x quando t -> 0.

    Em cada fator sobrevivem apenas as coordenadas do suporte que minimizam
    <w_i, lam>; as demais são zeradas.

    Args:
        scene (Scene): A cena com o ponto marcado.
        lam (Cocharacter): O subgrupo a um parâmetro.

    Returns:
        SpecialisationResult: O ponto limite (como Scene), os níveis m_k e os novos suportes.
    """
    lam = Cocharacter(tuple(lam))
    new_point, levels, supports = [], [], []
    for k, coords in enumerate(scene.point):
        factor = scene.factors[k]
        values = {i: pairing(factor.weights[i], lam) for i in scene.supports[k]}
        level = min(values.values())
        keep = tuple(i for i in scene.supports[k] if values[i] == level)
        new_point.append(tuple(coords[i] if i in keep else 0j for i in range(len(coords))))
        levels.append(level)
        supports.append(keep)
    limit = scene.with_point(tuple(new_point), supports=tuple(supports))
    return SpecialisationResult(limit=limit, levels=tuple(levels), supports=tuple(supports))


def equivariant_specialise(graded, lam):
    """(x, zeta) ~> (lim_lam x, zeta + lam); o resultado é um ponto graduado válido."""
    graded.validate()
    lam = Cocharacter(tuple(lam))
    result = specialise(graded.scene, lam)
    return GradedPoint(result.limit, graded.lam + lam)


def levi_blocks(lam):
    """Partição das coordenadas de lam pelo valor da entrada (descrição do centralizador)."""
    blocks = {}
    for index, value in enumerate(lam):
        blocks.setdefault(value, []).append(index)
    return tuple(tuple(block) for block in sorted(blocks.values()))


def grad_components_BG(datum, bound, cap=DEFAULT_WEYL_CAP):
    """
    Enumera as órbitas de Weyl de cocaracteres na caixa [-bound, bound]^r.

    Cada órbita vira um GradComponent com o representante canônico
    (máximo lexicográfico), o tamanho da órbita e os blocos de Levi.
    """
    if int(bound) < 1:
        raise PreconditionError(GRADED_BAD_BOUND.format(bound=bound))
    seen = set()
    components = []
    for entries in itertools.product(range(-int(bound), int(bound) + 1), repeat=datum.rank):
        if entries in seen:
            continue
        orbit = datum.orbit(entries, cap)
        seen.update(orbit)
        representative = Cocharacter(orbit[-1])
        components.append(GradComponent(representative, len(orbit), levi_blocks(representative)))
    components.sort(key=lambda component: component.representative.entries)
    logger.debug(f"Grad(B{datum.name}) com raio {bound}: {len(components)} componentes.")
    return components


def charges_dimension_BG(datum, method='equations', cap=DEFAULT_WEYL_CAP):
    """
    Dimensão do espaço de funcionais lineares W-invariantes no reticulado de cocaracteres.

    Args:
        datum (RootDatumLite): Os dados de Weyl.
        method (str): 'equations' resolve (g^T - I) f = 0 para os geradores;
                      'reynolds' usa o posto do operador de média sobre W.

    Returns:
        int: A dimensão complexa de Charges(BG).
    """
    if method == 'equations':
        rows = []
        for generator in datum.weyl_generators:
            difference = sympy.Matrix(generator).T - sympy.eye(datum.rank)
            rows.extend(difference.tolist())
        return datum.rank - rational_rank(rows)
    if method == 'reynolds':
        group = datum.weyl_group(cap)
        total = np.sum([np.array(g, dtype=np.int64).T for g in group], axis=0)
        return rational_rank(total.tolist())
    raise ValueError(f"Método desconhecido: {method!r}")
