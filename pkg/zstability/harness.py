# zstability/harness.py
"""
Geração determinística de instâncias e a verificação numérica do teorema de
Kempf-Ness: o veredito algébrico (politopo) contra o solucionador do mapa de momento.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import sympy

from .algebra import Cocharacter, LinearisedFactor, Scene, act
from .charge import CentralCharge, stability_margin_real
from .constants import (
    HARNESS_BAD_SPEC, HARNESS_INDEX_RANGE, MAX_COORDINATES, MAX_FACTORS, MAX_RANK,
    REPORT_VERSION, SOLVER_TOL, SPECIALISATION_DEPTH, UNSTABLE_FLOOR_TOLERANCE,
)
from .exceptions import PreconditionError, ZStabilityError
from .graded import GradedPoint, specialise
from .moment import FlowStatus, compatibility_check, solve_critical
from .stability import VerdictClass, classify, optimal_destabiliser
from .utils import charge_to_dict, scene_to_dict

logger = logging.getLogger(__name__)

PHASES = (sympy.Integer(0), sympy.pi / 4, sympy.pi / 2 - sympy.Rational(1, 10))
SHIFT_MODES = ('interior', 'boundary', 'exterior')


@dataclass(frozen=True)
class InstanceSpec:
    rank_range: tuple = (1, 3)
    factor_count_range: tuple = (1, 3)
    coords_range: tuple = (2, 5)
    weight_bound: int = 3
    seed: int = 0
    count: int = 200

    def __post_init__(self):
        for name in ('rank_range', 'factor_count_range', 'coords_range'):
            low, high = (int(v) for v in getattr(self, name))
            if low > high or low < 1:
                raise PreconditionError(HARNESS_BAD_SPEC.format(message=f"{name} vazio: ({low}, {high})"))
            object.__setattr__(self, name, (low, high))
        if self.rank_range[1] > MAX_RANK:
            raise PreconditionError(HARNESS_BAD_SPEC.format(message=f"posto acima de {MAX_RANK}"))
        if self.factor_count_range[1] > MAX_FACTORS:
            raise PreconditionError(HARNESS_BAD_SPEC.format(message=f"mais de {MAX_FACTORS} fatores"))
        if self.coords_range[0] < 2 or self.coords_range[1] > MAX_COORDINATES:
            raise PreconditionError(HARNESS_BAD_SPEC.format(message=f"coordenadas fora de [2, {MAX_COORDINATES}]"))
        if int(self.weight_bound) < 1 or int(self.count) < 0:
            raise PreconditionError(HARNESS_BAD_SPEC.format(message="weight_bound >= 1 e count >= 0"))

    def to_dict(self):
        return asdict(self)


# --- Geração ---

def _sample_rational(rng, low, high, denominator=2):
    return sympy.Rational(int(rng.integers(low * denominator, high * denominator + 1)), denominator)


def _sample_coefficient(rng, phase):
    """c = a + b i racional gaussiano com r = Im(e^{-i phi} c) >= 1/4."""
    rotation = complex(sympy.exp(-sympy.I * phase))
    while True:
        a = _sample_rational(rng, -2, 2)
        b = _sample_rational(rng, 0, 3)
        if (rotation * complex(a + sympy.I * b)).imag >= 0.25:
            return sympy.expand(a + sympy.I * b)


def _shift_for(weights, mode):
    rows = [tuple(sympy.Integer(w) for w in row) for row in weights]
    centroid = tuple(sum(column, sympy.Integer(0)) / len(rows) for column in zip(*rows))
    vertex = min(rows)
    if mode == 'interior':
        return centroid
    if mode == 'boundary':
        return vertex
    return tuple(2 * v - c for v, c in zip(vertex, centroid))


def generate_scene(spec, index):
    """
    Instância determinística a partir de (seed, index).

    Pesos inteiros em [-bound, bound], coordenadas complexas com zeros ocasionais,
    deslocamentos no interior, na fronteira ou fora do politopo de cada fator
    (todos no mesmo modo, para atingir todas as classes de veredito) e uma carga
    racional gaussiana com r_k > 0 numa das fases 0, pi/4, pi/2 - 1/10.

    Returns:
        tuple: (Scene, CentralCharge)
    """
    if not 0 <= index < spec.count:
        raise PreconditionError(HARNESS_INDEX_RANGE.format(index=index, count=spec.count))
    rng = np.random.default_rng([int(spec.seed) % 2 ** 64, int(index)])
    rank = int(rng.integers(spec.rank_range[0], spec.rank_range[1] + 1))
    factor_count = int(rng.integers(spec.factor_count_range[0], spec.factor_count_range[1] + 1))
    mode = SHIFT_MODES[int(rng.integers(len(SHIFT_MODES)))]
    phase = PHASES[int(rng.integers(len(PHASES)))]
    bound = int(spec.weight_bound)

    factors, point, coefficients = [], [], []
    for k in range(factor_count):
        size = int(rng.integers(spec.coords_range[0], spec.coords_range[1] + 1))
        weights = rng.integers(-bound, bound + 1, size=(size, rank)).tolist()
        coords = rng.normal(size=size) + 1j * rng.normal(size=size)
        if size > 2 and rng.random() < 0.3:
            coords[int(rng.integers(size))] = 0
        supported = [weights[i] for i in range(size) if coords[i] != 0]
        factors.append(LinearisedFactor(weights, _shift_for(supported, mode), label=f'F{k}'))
        point.append(tuple(complex(c) for c in coords))
        coefficients.append(_sample_coefficient(rng, phase))

    scene = Scene(rank, tuple(factors), tuple(point))
    charge = CentralCharge(tuple(coefficients), phase, name=f'gerada-{index}')
    return scene, charge


# --- Verificação ---

@dataclass
class VerificationReport:
    spec: dict
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def summary(self):
        classes = {}
        for row in self.rows:
            classes[row['verdict']] = classes.get(row['verdict'], 0) + 1
        agreements = sum(1 for row in self.rows if row['agreement'])
        return {
            'instances': len(self.rows),
            'agreements': agreements,
            'disagreements': len(self.rows) - agreements,
            'verdicts': dict(sorted(classes.items())),
        }

    @property
    def ok(self):
        return all(row['agreement'] for row in self.rows)

    def to_dict(self):
        return {
            'version': REPORT_VERSION,
            'spec': self.spec,
            'rows': self.rows,
            'summary': self.summary,
            'failures': self.failures,
        }


def _polystable_limit(scene, charge, verdict):
    """Especializa pelo testemunho até sair do caso estritamente semiestável."""
    for _ in range(SPECIALISATION_DEPTH):
        scene = specialise(scene, verdict.witness).limit
        verdict = classify(scene, charge)
        if verdict.cls != VerdictClass.STRICTLY_SEMISTABLE:
            return scene, verdict
    return scene, verdict


def check_instance(scene, charge, tol=SOLVER_TOL):
    """
    Compara classify com solve_critical numa instância.

    Returns:
        dict: linha do relatório com veredito, estado do solucionador, piso do
        resíduo e o sinalizador de concordância com o teorema.
    """
    verdict = classify(scene, charge)
    solution = solve_critical(scene, charge, tol=tol)
    row = {
        'verdict': verdict.cls.value,
        'numeric': verdict.numeric,
        'solver_status': solution.status.value,
        'residual_norm': solution.residual_norm,
        'residual_floor': solution.trace.residual_floor,
        'iterations': solution.iterations,
        'distance': None,
        'limit_status': None,
        'phase_deviation': None,
    }

    if verdict.is_polystable:
        agreement = solution.converged and solution.residual_norm < tol
        if solution.converged:
            critical = act(scene, solution.sigma)
            graded = GradedPoint(critical, Cocharacter.zero(scene.rank))
            row['phase_deviation'] = compatibility_check(critical, charge, graded).phase_deviation
    elif verdict.cls == VerdictClass.STRICTLY_SEMISTABLE:
        limit, limit_verdict = _polystable_limit(scene, charge, verdict)
        limit_solution = solve_critical(limit, charge, tol=tol) if limit_verdict.is_polystable else None
        row['limit_status'] = limit_solution.status.value if limit_solution else limit_verdict.cls.value
        agreement = not solution.converged and bool(limit_solution and limit_solution.converged)
    else:
        distance = optimal_destabiliser(scene, charge).distance
        row['distance'] = distance
        floor = solution.trace.residual_floor
        agreement = solution.status == FlowStatus.DIVERGING and abs(floor - distance) < UNSTABLE_FLOOR_TOLERANCE
    row['agreement'] = bool(agreement)
    return row


def _verify_index(spec, index, tol):
    scene, charge = generate_scene(spec, index)
    try:
        row = check_instance(scene, charge, tol)
    except Exception as exc:
        logger.exception(f"Falha inesperada na instância {index} (seed {spec.seed}).")
        row = {'verdict': 'Error', 'error': str(exc), 'agreement': False}
    return {'index': index, 'seed': spec.seed, 'rank': scene.rank, 'factors': len(scene.factors), **row}


def kempf_ness_verify(spec, tol=SOLVER_TOL, threads=None, shrink=True):
    """
    Roda a verificação em todas as instâncias de spec, em paralelo.

    A montagem do relatório segue a ordem dos índices, independente da ordem de
    conclusão. Discordâncias carregam uma reprodução minimizada.
    """
    logger.info(f"Verificando {spec.count} instâncias (seed {spec.seed}, tol {tol:g}).")
    with ThreadPoolExecutor(max_workers=threads) as executor:
        rows = list(executor.map(lambda index: _verify_index(spec, index, tol), range(spec.count)))
    report = VerificationReport(spec=spec.to_dict(), rows=rows)
    for row in rows:
        if row['agreement']:
            continue
        scene, charge = generate_scene(spec, row['index'])
        failure = {'index': row['index'], 'seed': spec.seed}
        if shrink:
            small_scene, small_charge = shrink_disagreement(scene, charge, lambda s, c: not _agrees(s, c, tol))
            failure['scene'] = scene_to_dict(small_scene)
            failure['charge'] = charge_to_dict(small_charge)
        report.failures.append(failure)
    summary = report.summary
    logger.info(f"Verificação concluída: {summary['agreements']}/{summary['instances']} concordâncias.")
    return report


def _agrees(scene, charge, tol):
    try:
        return check_instance(scene, charge, tol)['agreement']
    except ZStabilityError:
        return True


def shrink_disagreement(scene, charge, predicate):
    """
    Minimização gulosa: remove fatores e depois coordenadas enquanto predicate continuar verdadeiro.

    Returns:
        tuple: (Scene, CentralCharge) minimizados.
    """
    def holds(candidate_scene, candidate_charge):
        try:
            return predicate(candidate_scene, candidate_charge)
        except ZStabilityError:
            return False

    changed = True
    while changed:
        changed = False
        for k in range(len(scene.factors)):
            if len(scene.factors) == 1:
                break
            keep = [j for j in range(len(scene.factors)) if j != k]
            candidate = _subscene(scene, keep)
            reduced = CentralCharge(tuple(charge.coefficients[j] for j in keep), charge.phase, charge.name)
            if holds(candidate, reduced):
                scene, charge, changed = candidate, reduced, True
                break
        if changed:
            continue
        for k, factor in enumerate(scene.factors):
            for i in range(len(factor.weights)):
                candidate = _drop_coordinate(scene, k, i)
                if candidate is not None and holds(candidate, charge):
                    scene, changed = candidate, True
                    break
            if changed:
                break
    return scene, charge


def _subscene(scene, keep):
    return Scene(
        scene.rank,
        tuple(scene.factors[j] for j in keep),
        tuple(scene.point[j] for j in keep),
        tuple(scene.supports[j] for j in keep),
    )


def _drop_coordinate(scene, k, i):
    factor = scene.factors[k]
    if len(factor.weights) <= 2 or scene.supports[k] == (i,):
        return None
    weights = tuple(row for j, row in enumerate(factor.weights) if j != i)
    coords = tuple(c for j, c in enumerate(scene.point[k]) if j != i)
    support = tuple(j - (j > i) for j in scene.supports[k] if j != i)
    factors = list(scene.factors)
    factors[k] = LinearisedFactor(weights, factor.shift, factor.label)
    point, supports = list(scene.point), list(scene.supports)
    point[k], supports[k] = coords, support
    return Scene(scene.rank, tuple(factors), tuple(point), tuple(supports))


# --- Varredura no espaço de cargas ---

@dataclass
class SweepReport:
    points: list = field(default_factory=list)
    walls: list = field(default_factory=list)

    def to_dict(self):
        return {'version': REPORT_VERSION, 'points': self.points, 'walls': self.walls}


def _charge_at(base, direction, t):
    coefficients = tuple(sympy.expand(b + t * d) for b, d in zip(base.coefficients, direction.coefficients))
    return CentralCharge(coefficients, base.phase, base.name)


def charge_sweep(scene, base, direction, steps):
    """
    Classifica a cena em base + (j/steps) * direction, j = 0..steps, e reporta as
    paredes (mudanças de veredito) com resolução 1/steps. Cargas com r_k negativo
    ou nulas são marcadas e passam pelo oráculo.
    """
    steps = int(steps)
    if steps < 1:
        raise PreconditionError(HARNESS_BAD_SPEC.format(message="steps >= 1"))
    report = SweepReport()
    previous = None
    for j in range(steps + 1):
        t = sympy.Rational(j, steps)
        entry = {'t': str(t), 'verdict': None, 'flagged': False, 'margin': None}
        try:
            charge = _charge_at(base, direction, t)
            entry['flagged'] = any(r < 0 for r in charge.r_values)
            verdict = classify(scene, charge, allow_mixed=True)
            entry['verdict'] = verdict.cls.value
            entry['margin'] = verdict.margin
        except ZStabilityError as exc:
            entry['flagged'] = True
            entry['error'] = str(exc)
        if previous is not None and entry['verdict'] != previous['verdict']:
            report.walls.append({
                'from_t': previous['t'], 'to_t': entry['t'],
                'from': previous['verdict'], 'to': entry['verdict'],
            })
        report.points.append(entry)
        previous = entry
    logger.info(f"Varredura com {steps} passos: {len(report.walls)} paredes.")
    return report


# --- Direções irracionais ---

@dataclass
class ContinuityReport:
    real_margin: float
    rows: list = field(default_factory=list)

    @property
    def converging(self):
        gaps = [row['gap'] for row in self.rows]
        return bool(gaps) and gaps[-1] <= gaps[0] + 1e-12


def margin_continuity(scene, charge, v, denominators=(1, 2, 4, 8, 16, 32, 64, 128, 256, 1024)):
    """
    Aproxima uma direção real v por cocaracteres round(q v) e compara as margens
    normalizadas com a margem normalizada de v.
    """
    vector = np.array([float(e) for e in v], dtype=float)
    length = float(np.linalg.norm(vector))
    real = stability_margin_real(scene, charge, vector) / length
    report = ContinuityReport(real)
    for q in denominators:
        approximant = np.rint(q * vector).astype(np.int64)
        if not approximant.any():
            continue
        value = stability_margin_real(scene, charge, approximant) / float(np.linalg.norm(approximant))
        report.rows.append({
            'denominator': int(q),
            'approximant': [int(e) for e in approximant],
            'normalized_margin': value,
            'gap': abs(value - real),
            'angle': math.acos(min(1.0, float(approximant @ vector) / (np.linalg.norm(approximant) * length))),
        })
    return report
