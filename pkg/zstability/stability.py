# zstability/stability.py
"""
Classificação exata de Z-estabilidade pelo politopo ponderado de Minkowski
Q = sum_k r_k P_k, oráculo de força bruta e subgrupo desestabilizante ótimo.

A margem de um cocaractere é <a, lam> - min_Q <., lam>, com a = sum_k r_k u_k.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy
from django.db.models import TextChoices
from scipy.linalg import null_space, orth, qr
from scipy.optimize import minimize
from scipy.spatial import ConvexHull

from .algebra import Cocharacter, GroupDirection, as_rational, primitive_vector, rational_nullspace, stabiliser_lie
from .charge import lattice_margins, margin_of_degeneration, stability_margin_real
from .constants import (
    DESTABILISER_MAX_SCALE, DESTABILISER_TOLERANCE, FLOAT_TOLERANCE, STABILITY_FACET_MISMATCH,
    STABILITY_MIXED_SIGNS, STABILITY_NOT_UNSTABLE,
)
from .exceptions import NumericFailure, PreconditionError

logger = logging.getLogger(__name__)


class VerdictClass(TextChoices):
    STABLE = 'Stable'
    POLYSTABLE = 'Polystable'
    STRICTLY_SEMISTABLE = 'StrictlySemistable'
    UNSTABLE = 'Unstable'


@dataclass(frozen=True)
class Verdict:
    cls: VerdictClass
    witness: Cocharacter = None
    margin: object = 0
    numeric: bool = False
    method: str = 'polytope'

    @property
    def is_polystable(self):
        return self.cls in (VerdictClass.STABLE, VerdictClass.POLYSTABLE)

    @property
    def is_semistable(self):
        return self.cls != VerdictClass.UNSTABLE

    def to_dict(self):
        return {
            'class': self.cls.value,
            'witness': list(self.witness) if self.witness is not None else None,
            'margin': self.margin,
            'numeric': self.numeric,
            'method': self.method,
        }


@dataclass(frozen=True)
class Facet:
    """Desigualdade <normal, x> >= offset, com a normal no espaço de direções do politopo."""
    normal: tuple
    offset: object


def _dot(u, v):
    return sum((a * b for a, b in zip(u, v)), sympy.Integer(0) if _exact_vector(u) and _exact_vector(v) else 0.0)


def _exact_vector(v):
    return all(isinstance(e, (int, sympy.Rational)) for e in v)


def _sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


@dataclass(frozen=True)
class _HullData:
    vertices: tuple
    facets: tuple
    dim: int
    hull_basis: tuple
    orthogonal_basis: tuple


def _convex_hull(points, exact, tolerance):
    """
    Pontos extremos e facetas do fecho convexo dentro do seu fecho afim.

    Em dimensão >= 2 o casco é calculado pelo qhull em coordenadas pivô e,
    no modo exato, as normais são recalculadas em aritmética racional.
    """
    points = list(dict.fromkeys(points)) if exact else _unique_floats(points)
    rank = len(points[0])
    base = points[0]
    differences = [_sub(p, base) for p in points[1:]]

    if exact:
        if differences:
            reduced, pivots = sympy.Matrix(differences).rref()
            dim = len(pivots)
            hull_basis = tuple(tuple(reduced.row(i)) for i in range(dim))
        else:
            dim, pivots, hull_basis = 0, (), ()
        orthogonal_basis = rational_nullspace([list(d) for d in differences if any(d)], rank)
    else:
        D = np.array(differences, dtype=float).reshape(-1, rank)
        scale = max(1.0, float(np.abs(D).max())) if D.size else 1.0
        dim = int(np.linalg.matrix_rank(D, tol=tolerance * scale)) if D.size else 0
        hull_basis = tuple(tuple(col) for col in orth(D.T, rcond=tolerance).T) if dim else ()
        orthogonal_basis = tuple(tuple(col) for col in null_space(D, rcond=tolerance).T) if dim else tuple(
            tuple(float(i == j) for j in range(rank)) for i in range(rank))
        pivots = tuple(sorted(qr(D, pivoting=True)[2][:dim])) if dim else ()

    if dim == 0:
        return _HullData((base,), (), 0, (), orthogonal_basis)

    if dim == 1:
        direction = primitive_vector(hull_basis[0]) if exact else tuple(np.array(hull_basis[0]) / np.linalg.norm(hull_basis[0]))
        values = [_dot(direction, p) for p in points]
        low = min(range(len(points)), key=lambda i: values[i])
        high = max(range(len(points)), key=lambda i: values[i])
        facets = (
            Facet(tuple(direction), values[low]),
            Facet(tuple(-e for e in direction), -values[high]),
        )
        return _HullData((points[low], points[high]), facets, 1, hull_basis, orthogonal_basis)

    projected = np.array([[float(p[i]) for i in pivots] for p in points])
    hull = ConvexHull(projected)
    vertices = tuple(points[i] for i in sorted(hull.vertices))
    centre = _centroid(vertices, exact)
    basis = sympy.Matrix(hull_basis) if exact else np.array(hull_basis)
    facets, seen = [], set()
    for simplex in hull.simplices:
        facet_points = [points[i] for i in simplex]
        normal = _facet_normal(facet_points, basis, exact)
        offset = _dot(normal, facet_points[0])
        if _dot(normal, centre) - offset < 0:
            normal, offset = tuple(-e for e in normal), -offset
        key = (normal, offset) if exact else (tuple(np.round(normal, 9)), round(float(offset), 9))
        if key not in seen:
            seen.add(key)
            facets.append(Facet(normal, offset))

    for point in points:
        for facet in facets:
            slack = _dot(facet.normal, point) - facet.offset
            if (slack < 0) if exact else (slack < -tolerance):
                raise NumericFailure(STABILITY_FACET_MISMATCH)
    return _HullData(vertices, tuple(facets), dim, hull_basis, orthogonal_basis)


def _facet_normal(facet_points, basis, exact):
    base = facet_points[0]
    if exact:
        rows = [list(basis * sympy.Matrix(_sub(p, base))) for p in facet_points[1:]]
        y = sympy.Matrix(rows).nullspace()[0]
        return primitive_vector(list(basis.T * y))
    rows = np.array([basis @ np.array(_sub(p, base), dtype=float) for p in facet_points[1:]])
    y = null_space(rows)[:, 0]
    normal = basis.T @ y
    return tuple(float(e) for e in normal / np.linalg.norm(normal))


def _centroid(points, exact):
    count = len(points)
    if exact:
        return tuple(sum(column, sympy.Integer(0)) / count for column in zip(*points))
    return tuple(float(np.mean(column)) for column in zip(*points))


def _unique_floats(points):
    unique = []
    for point in points:
        if not any(max(abs(a - b) for a, b in zip(point, other)) <= FLOAT_TOLERANCE for other in unique):
            unique.append(tuple(float(e) for e in point))
    return unique


@dataclass(frozen=True)
class WeightedPolytope:
    """
    Politopo ponderado Q = sum_k r_k P_k (P_k = fecho dos pesos suportados do fator k)
    e o deslocamento a = sum_k r_k u_k. Exato quando todos os r_k são racionais.
    """
    vertices: tuple
    shift: tuple
    affine_hull_dim: int
    exact: bool
    facets: tuple = ()
    hull_basis: tuple = ()
    orthogonal_basis: tuple = ()
    tolerance: float = FLOAT_TOLERANCE
    zero_factors: tuple = field(default=())

    @property
    def rank(self):
        return len(self.shift)

    @property
    def base(self):
        return self.vertices[0]

    def _exact_value(self, value):
        return self.exact and isinstance(value, (int, sympy.Rational))

    def _is_zero(self, value):
        return value == 0 if self._exact_value(value) else abs(float(value)) <= self.tolerance

    def _is_negative(self, value):
        return value < 0 if self._exact_value(value) else float(value) < -self.tolerance

    def _is_positive(self, value):
        return value > 0 if self._exact_value(value) else float(value) > self.tolerance

    def slacks(self, point):
        return [_dot(f.normal, point) - f.offset for f in self.facets]

    def in_affine_hull(self, point):
        offset = _sub(point, self.base)
        return all(self._is_zero(_dot(o, offset)) for o in self.orthogonal_basis)

    def contains(self, point):
        return self.in_affine_hull(point) and not any(self._is_negative(s) for s in self.slacks(point))

    def in_relative_interior(self, point):
        return self.in_affine_hull(point) and all(self._is_positive(s) for s in self.slacks(point))

    def tight_facets(self, point):
        return [f for f, s in zip(self.facets, self.slacks(point)) if self._is_zero(s)]

    def support_min(self, direction):
        return min(_dot(v, direction) for v in self.vertices)

    def margin(self, direction):
        """Margem <a, lam> - min_Q <., lam> de uma direção (cocaractere ou real)."""
        entries = tuple(direction)
        if not self.exact or not _exact_vector(entries):
            a = np.array([float(e) for e in self.shift])
            v = np.array([float(e) for e in entries])
            V = np.array([[float(e) for e in vertex] for vertex in self.vertices])
            return float(a @ v - (V @ v).min())
        return _dot(self.shift, entries) - self.support_min(entries)

    def nearest_point(self, point=None):
        """
        Projeção euclidiana de um ponto (por padrão, do deslocamento a) sobre Q.

        SLSQP nos pesos baricêntricos dos vértices; depois a projeção é refinada
        no fecho afim dos vértices ativos e aceita se for viável e ótima.
        """
        target = tuple(point) if point is not None else self.shift
        if len(self.vertices) == 1:
            return self.vertices[0]
        V = np.array([[float(e) for e in v] for v in self.vertices])
        a = np.array([float(e) for e in target])
        count = len(self.vertices)

        def objective(mu):
            residual = V.T @ mu - a
            return residual @ residual, 2 * V @ residual

        result = minimize(
            objective, np.full(count, 1.0 / count), jac=True, method='SLSQP',
            bounds=[(0.0, 1.0)] * count,
            constraints=[{'type': 'eq', 'fun': lambda mu: mu.sum() - 1.0, 'jac': lambda mu: np.ones(count)}],
            options={'ftol': 1e-15, 'maxiter': 1000},
        )
        if not result.success:
            logger.warning(f"SLSQP não convergiu na projeção sobre Q: {result.message}")
        fallback = tuple(float(e) for e in V.T @ result.x)
        active = [self.vertices[i] for i in np.flatnonzero(result.x > 1e-7)] or [self.vertices[int(np.argmax(result.x))]]
        for vertices in (active, self._face_vertices(fallback)):
            refined = self._project_affine(vertices, target)
            if self._is_optimal(refined, target):
                return refined
        logger.debug("Refinamento da projeção rejeitado; usando a solução do SLSQP.")
        return fallback

    def _face_vertices(self, point, tolerance=1e-6):
        """Vértices da menor face de Q que contém (aproximadamente) o ponto."""
        tight = [f for f, s in zip(self.facets, self.slacks(point)) if abs(float(s)) <= tolerance]
        return [
            v for v in self.vertices
            if all(self._is_zero(_dot(f.normal, v) - f.offset) for f in tight)
        ] or list(self.vertices)

    def _project_affine(self, active, target):
        base = active[0]
        if self.exact and _exact_vector(target):
            E = sympy.Matrix([list(_sub(v, base)) for v in active[1:]]).T if len(active) > 1 else None
            if E is None:
                return base
            _, pivots = E.rref()
            E = E[:, list(pivots)]
            t = (E.T * E).LUsolve(E.T * sympy.Matrix(_sub(target, base)))
            return tuple(sympy.Matrix(base) + E * t)
        if len(active) == 1:
            return tuple(float(e) for e in base)
        E = np.array([[float(e) for e in _sub(v, base)] for v in active[1:]]).T
        b = np.array([float(e) for e in base])
        t, *_ = np.linalg.lstsq(E, np.array([float(e) for e in target]) - b, rcond=None)
        return tuple(float(e) for e in b + E @ t)

    def _is_optimal(self, candidate, target):
        if not self.contains(candidate):
            return False
        gap = _sub(target, candidate)
        worst = max(_dot(gap, _sub(v, candidate)) for v in self.vertices)
        return worst <= 0 if self._exact_value(worst) else float(worst) <= self.tolerance

    def distance(self, point=None):
        target = tuple(point) if point is not None else self.shift
        nearest = self.nearest_point(target)
        return float(np.linalg.norm([float(a) - float(b) for a, b in zip(target, nearest)]))


def _check_signs(charge, allow_mixed):
    negative = [r for r in charge.r_values if r < 0]
    if negative and not allow_mixed:
        raise PreconditionError(STABILITY_MIXED_SIGNS.format(values=[str(r) for r in charge.r_values]))
    return bool(negative)


def weighted_polytope(scene, charge, tolerance=FLOAT_TOLERANCE):
    """
    Constrói Q como soma de Minkowski dos politopos de pesos suportados escalados por r_k.

    Fatores com r_k = 0 não contribuem e ficam registrados em zero_factors.
    """
    charge.check_factors(scene)
    _check_signs(charge, allow_mixed=False)
    exact = charge.is_exact
    summands, zero_factors = [], []
    shift = [sympy.Integer(0) if exact else 0.0] * scene.rank
    for k, factor in enumerate(scene.factors):
        r = charge.r_values[k]
        if r == 0:
            zero_factors.append(k)
            continue
        shift = [s + r * u if exact else s + float(r) * float(u) for s, u in zip(shift, factor.shift)]
        weights = [tuple(as_rational(w) for w in row) for row in scene.supported_weights(k)]
        if not exact:
            weights = [tuple(float(w) for w in row) for row in weights]
        local = _convex_hull(weights, exact, tolerance)
        summands.append([tuple(r * w if exact else float(r) * w for w in vertex) for vertex in local.vertices])

    if not summands:
        zero = tuple(sympy.Integer(0) if exact else 0.0 for _ in range(scene.rank))
        summands = [[zero]]
    candidates = [tuple(map(sum, zip(*choice))) for choice in itertools.product(*summands)]
    hull = _convex_hull(candidates, exact, tolerance)
    logger.debug(f"Politopo ponderado: {len(hull.vertices)} vértices, dimensão afim {hull.dim}.")
    return WeightedPolytope(
        vertices=hull.vertices, shift=tuple(shift), affine_hull_dim=hull.dim, exact=exact,
        facets=hull.facets, hull_basis=hull.hull_basis, orthogonal_basis=hull.orthogonal_basis,
        tolerance=tolerance, zero_factors=tuple(zero_factors),
    )


def default_oracle_bound(scene):
    return 1 + scene.weight_spread


def _fixes_factor(scene, k, direction):
    values = {_dot(row, direction) for row in scene.supported_weights(k)}
    return len(values) <= 1


def _integer_direction(vector, max_denominator=1000, tolerance=1e-9):
    """Vetor inteiro primitivo paralelo a um vetor real com direção racional."""
    vector = np.asarray(vector, dtype=float)
    pivot = float(np.abs(vector[np.abs(vector) > tolerance]).min())
    ratios = [Fraction(float(e) / pivot).limit_denominator(max_denominator) for e in vector]
    candidate = primitive_vector(ratios)
    unit = np.array(candidate, dtype=float) / np.linalg.norm(candidate)
    if np.linalg.norm(unit - vector / np.linalg.norm(vector)) > 1e-7:
        return None
    return Cocharacter(candidate)


def _boundary_witness(tight, exact):
    """Soma das normais primitivas inteiras das facetas que contêm a."""
    if exact:
        normals = [tuple(f.normal) for f in tight]
    else:
        normals = [_integer_direction(f.normal) for f in tight]
        if any(n is None for n in normals):
            return None
        normals = [tuple(n) for n in normals]
    total = [sum(column) for column in zip(*normals)]
    if not any(total):
        return None
    return Cocharacter(primitive_vector(total))


def classify(scene, charge, allow_mixed=False, oracle_bound=None):
    """
    Veredito de Z-estabilidade pelo critério do politopo ponderado.

    Instável se a não pertence a Q; estritamente semiestável se a está na fronteira
    relativa; poliestável no interior relativo e estável quando, além disso,
    o estabilizador é finito. Cargas de sinais mistos só passam pelo oráculo.
    """
    charge.check_factors(scene)
    if _check_signs(charge, allow_mixed):
        bound = oracle_bound or default_oracle_bound(scene)
        logger.warning(f"Coeficientes de sinais mistos; classificando pelo oráculo com raio {bound}.")
        return brute_force_classify(scene, charge, bound)

    polytope = weighted_polytope(scene, charge)
    numeric = not polytope.exact
    shift = polytope.shift

    if not polytope.contains(shift):
        destabiliser = optimal_destabiliser(scene, charge, polytope=polytope)
        witness = destabiliser.rational_approx
        return Verdict(VerdictClass.UNSTABLE, witness, margin_of_degeneration(scene, charge, witness), numeric)

    if not polytope.in_relative_interior(shift):
        witness = _boundary_witness(polytope.tight_facets(shift), polytope.exact)
        if witness is None:
            raise NumericFailure(STABILITY_FACET_MISMATCH)
        return Verdict(VerdictClass.STRICTLY_SEMISTABLE, witness, margin_of_degeneration(scene, charge, witness), numeric)

    for direction in _lattice_orthogonal(polytope):
        for k in polytope.zero_factors:
            if not _fixes_factor(scene, k, direction):
                witness = Cocharacter(direction)
                return Verdict(VerdictClass.STRICTLY_SEMISTABLE, witness, margin_of_degeneration(scene, charge, witness), numeric)

    margin = min(polytope.slacks(shift), default=sympy.Integer(0) if polytope.exact else 0.0)
    cls = VerdictClass.POLYSTABLE if stabiliser_lie(scene) else VerdictClass.STABLE
    return Verdict(cls, None, margin if polytope.exact else float(margin), numeric)


def _lattice_orthogonal(polytope):
    if polytope.exact:
        return polytope.orthogonal_basis
    directions = []
    for vector in polytope.orthogonal_basis:
        direction = _integer_direction(vector)
        if direction is not None:
            directions.append(tuple(direction))
    return directions


def brute_force_classify(scene, charge, bound):
    """
    Oráculo exaustivo: avalia a margem em todo lam não nulo de [-bound, bound]^r
    (mais a base do estabilizador) e classifica pelo padrão de sinais.
    """
    charge.check_factors(scene)
    bound = int(bound)
    box = [lam for lam in itertools.product(range(-bound, bound + 1), repeat=scene.rank) if any(lam)]
    stabiliser = stabiliser_lie(scene)
    extra = [v for b in stabiliser for v in (b, tuple(-e for e in b)) if max(abs(e) for e in v) > bound]
    lambdas = np.array(box + extra, dtype=np.int64).reshape(-1, scene.rank)
    margins = lattice_margins(scene, charge, lambdas)
    numeric = not margins.exact
    if margins.exact:
        signs = np.array([(v > 0) - (v < 0) for v in margins.values])
    else:
        values = margins.as_floats()
        signs = np.where(values > FLOAT_TOLERANCE, 1, np.where(values < -FLOAT_TOLERANCE, -1, 0))

    def value_at(index):
        if margins.exact:
            return sympy.Rational(int(margins.values[index]), margins.scale)
        return float(margins.as_floats()[index])

    norms = np.linalg.norm(lambdas.astype(float), axis=1)
    negative = np.flatnonzero(signs < 0)
    if negative.size:
        normalized = margins.as_floats()[negative] / norms[negative]
        index = int(negative[np.argmin(normalized)])
        return Verdict(VerdictClass.UNSTABLE, Cocharacter(lambdas[index]), value_at(index), numeric, 'oracle')

    zero = np.flatnonzero(signs == 0)
    fixes = np.ones(len(lambdas), dtype=bool)
    for k, factor in enumerate(scene.factors):
        weights = np.array(scene.supported_weights(k), dtype=np.int64)
        pairings = lambdas @ weights.T
        fixes &= pairings.max(axis=1) == pairings.min(axis=1)
    leaving = [i for i in zero if not fixes[i]]
    if leaving:
        index = min(leaving, key=lambda i: (norms[i], tuple(-lambdas[i])))
        return Verdict(VerdictClass.STRICTLY_SEMISTABLE, Cocharacter(lambdas[index]), value_at(index), numeric, 'oracle')

    positive = np.flatnonzero(signs > 0)
    margin = value_at(int(positive[np.argmin(margins.as_floats()[positive])])) if positive.size else 0
    cls = VerdictClass.POLYSTABLE if stabiliser else VerdictClass.STABLE
    return Verdict(cls, None, margin, numeric, 'oracle')


@dataclass(frozen=True)
class Destabiliser:
    direction: GroupDirection
    rational_approx: Cocharacter
    normalized_margin: float
    distance: float
    exact: bool
    nearest: tuple = ()

    def to_dict(self):
        return {
            'direction': [float(e) for e in self.direction],
            'rational_approx': list(self.rational_approx),
            'normalized_margin': self.normalized_margin,
            'distance': self.distance,
            'exact': self.exact,
        }


def optimal_destabiliser(scene, charge, polytope=None):
    """
    Direção de margem normalizada mínima: proporcional a proj_Q(a) - a.

    A margem normalizada vale -dist(a, Q); a aproximação racional é exata quando
    a projeção é racional e, caso contrário, o primeiro múltiplo inteiro cuja
    margem normalizada fica a menos de 1e-6 do ótimo.
    """
    polytope = polytope or weighted_polytope(scene, charge)
    if polytope.contains(polytope.shift):
        raise PreconditionError(STABILITY_NOT_UNSTABLE)
    nearest = polytope.nearest_point()
    difference = _sub(nearest, polytope.shift)
    vector = np.array([float(e) for e in difference])
    distance = float(np.linalg.norm(vector))
    unit = vector / distance
    exact = polytope.exact and _exact_vector(difference)
    if exact:
        approx = Cocharacter(primitive_vector(difference))
    else:
        approx = _scan_integer_multiples(polytope, unit, -distance)
    logger.info(f"Desestabilizador ótimo: dist(a, Q) = {distance:.6g}, aproximação {approx}.")
    return Destabiliser(
        direction=GroupDirection(tuple(float(e) for e in unit)), rational_approx=approx,
        normalized_margin=-distance, distance=distance, exact=exact, nearest=tuple(nearest),
    )


def _scan_integer_multiples(polytope, unit, optimum, chunk=4096):
    """Menor múltiplo s de unit cujo arredondamento tem margem normalizada a menos de 1e-6 do ótimo."""
    a = np.array([float(e) for e in polytope.shift])
    V = np.array([[float(e) for e in vertex] for vertex in polytope.vertices])
    start = 1
    while start <= DESTABILISER_MAX_SCALE:
        scales = np.arange(start, start + chunk, dtype=float)[:, None]
        candidates = np.rint(scales * unit)
        norms = np.linalg.norm(candidates, axis=1)
        valid = norms > 0
        margins = np.full(len(candidates), np.inf)
        margins[valid] = (candidates[valid] @ a - (candidates[valid] @ V.T).min(axis=1)) / norms[valid]
        hits = np.flatnonzero(margins - optimum <= DESTABILISER_TOLERANCE)
        if hits.size:
            return Cocharacter(primitive_vector([int(e) for e in candidates[hits[0]]]))
        start += chunk
    raise NumericFailure(f"Nenhuma aproximação inteira até a escala {DESTABILISER_MAX_SCALE}.")


def normalized_margin(scene, charge, direction):
    vector = [float(e) for e in direction]
    return stability_margin_real(scene, charge, vector) / math.sqrt(sum(e * e for e in vector))
